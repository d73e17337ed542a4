#pragma once

#include <cmath>
#include <fstream>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

#include "odec/rl/policy.hpp"

namespace odec::harness {

struct Stat {
  double mean = 0.0;
  double std = 0.0;

  /// Half-width of the normal-approximation 95% interval for the mean.
  double ci95(long n) const { return n > 0 ? 1.96 * std / std::sqrt(double(n)) : 0.0; }
  bool operator==(const Stat&) const = default;
};

inline Stat summarize(const std::vector<double>& xs) {
  Stat s;
  if (xs.empty()) return s;
  for (double x : xs) s.mean += x;
  s.mean /= double(xs.size());
  for (double x : xs) s.std += (x - s.mean) * (x - s.mean);
  s.std = std::sqrt(s.std / double(xs.size()));
  return s;
}

/// Per-episode statistics; standard deviations are taken across episodes.
struct EvalReport {
  std::string env;
  std::string mode;
  int agents = 0;
  long episodes = 0;
  long steps = 0;
  Stat reward;
  Stat length;
  std::vector<Stat> active;  // per agent
  std::vector<double> episode_rewards;

  bool operator==(const EvalReport&) const = default;
};

using TeamPolicyFn = std::function<TeamAction(const TeamState&)>;

struct EpisodeStats {
  double reward = 0.0;
  int length = 0;
  std::vector<int> active;
};

inline EvalReport build_report(const Environment& env, const std::vector<EpisodeStats>& eps, long steps) {
  EvalReport r;
  r.env = std::string(env.tag());
  r.mode = std::string(to_string(env.mode()));
  r.agents = env.agent_count();
  r.episodes = static_cast<long>(eps.size());
  r.steps = steps;
  std::vector<double> rewards, lengths;
  for (const auto& e : eps) {
    rewards.push_back(e.reward);
    lengths.push_back(e.length);
  }
  r.reward = summarize(rewards);
  r.length = summarize(lengths);
  r.episode_rewards = rewards;
  for (int i = 0; i < env.agent_count(); ++i) {
    std::vector<double> a;
    for (const auto& e : eps) a.push_back(e.active[static_cast<std::size_t>(i)]);
    r.active.push_back(summarize(a));
  }
  return r;
}

/// Drives `policy` through the environment. Stops after `max_steps` steps or
/// `max_episodes` completed episodes, whichever comes first; only completed
/// episodes enter the statistics. Episode k resets with mix_seed(seed, k).
inline EvalReport run_evaluation(const Environment& proto, const TeamPolicyFn& policy, long max_steps,
                                 long max_episodes, std::uint64_t seed) {
  auto env = proto.clone();
  std::vector<EpisodeStats> done;
  long steps = 0;
  for (std::uint64_t k = 0; steps < max_steps && static_cast<long>(done.size()) < max_episodes; ++k) {
    EpisodeStats ep{0.0, 0, std::vector<int>(static_cast<std::size_t>(env->agent_count()), 0)};
    TeamState s = env->reset(mix_seed(seed, k));
    bool finished = false;
    while (steps < max_steps) {
      for (AgentId i : env->registry().members(s.team)) ++ep.active[static_cast<std::size_t>(i)];
      StepResult r = env->step(policy(s));
      ++steps;
      ep.reward += r.reward;
      ++ep.length;
      s = std::move(r.state);
      if (r.done) {
        finished = true;
        break;
      }
    }
    if (finished) done.push_back(std::move(ep));
  }
  return build_report(*env, done, steps);
}

/// Runs the policies for `n_steps` environment steps (greedy unless `stochastic`).
inline EvalReport evaluate_policies(const rl::PolicyVector& policies, const Environment& env, long n_steps = 10000,
                                    std::uint64_t seed = 0, bool stochastic = false) {
  if (n_steps < env.horizon())
    throw Error(ErrorCode::SchemaError, "n_steps must cover at least one full episode");
  std::mt19937_64 rng(mix_seed(seed, 99));
  TeamPolicyFn fn = [&](const TeamState& s) { return stochastic ? policies.act(s, rng).action : policies.greedy(s); };
  return run_evaluation(env, fn, n_steps, std::numeric_limits<long>::max(), seed);
}

inline EvalReport evaluate_episodes(const TeamPolicyFn& policy, const Environment& env, long n_episodes,
                                    std::uint64_t seed = 0) {
  return run_evaluation(env, policy, std::numeric_limits<long>::max(), n_episodes, seed);
}

struct Comparison {
  double reward_delta = 0.0;
  std::vector<double> active_delta;  // open − closed, per agent
  bool reward_improved = false;
  bool called_agents_save_steps = false;
  bool pass = false;
};

/// Directional checks: open reward above closed; every called agent (id ≥ 1)
/// active for fewer steps than in the closed team and than agent 0.
inline Comparison compare_open_closed(const EvalReport& open, const EvalReport& closed) {
  if (open.env != closed.env || open.agents != closed.agents)
    throw Error(ErrorCode::IncompatibleReports, "reports come from different environments");
  Comparison c;
  c.reward_delta = open.reward.mean - closed.reward.mean;
  for (std::size_t i = 0; i < open.active.size(); ++i) c.active_delta.push_back(open.active[i].mean - closed.active[i].mean);
  c.reward_improved = c.reward_delta > 0.0;
  c.called_agents_save_steps = open.active.size() > 1;
  for (std::size_t i = 1; i < open.active.size(); ++i)
    c.called_agents_save_steps = c.called_agents_save_steps && open.active[i].mean < closed.active[i].mean &&
                                 open.active[i].mean < open.active[0].mean;
  c.pass = c.reward_improved && c.called_agents_save_steps;
  return c;
}

inline nlohmann::ordered_json to_json(const Stat& s) { return {{"mean", s.mean}, {"std", s.std}}; }

inline nlohmann::ordered_json to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["env"] = r.env;
  j["mode"] = r.mode;
  j["agents"] = r.agents;
  j["episodes"] = r.episodes;
  j["steps"] = r.steps;
  j["reward"] = to_json(r.reward);
  j["length"] = to_json(r.length);
  j["active"] = nlohmann::ordered_json::array();
  for (const auto& a : r.active) j["active"].push_back(to_json(a));
  j["episode_rewards"] = r.episode_rewards;
  return j;
}

inline nlohmann::ordered_json to_json(const Comparison& c) {
  return {{"reward_delta", c.reward_delta},
          {"active_delta", c.active_delta},
          {"reward_improved", c.reward_improved},
          {"called_agents_save_steps", c.called_agents_save_steps},
          {"pass", c.pass}};
}

inline Stat stat_from_json(const nlohmann::json& j) { return {j.at("mean").get<double>(), j.at("std").get<double>()}; }

inline EvalReport report_from_json(const nlohmann::json& j) {
  try {
    EvalReport r;
    r.env = j.at("env").get<std::string>();
    r.mode = j.at("mode").get<std::string>();
    r.agents = j.at("agents").get<int>();
    r.episodes = j.at("episodes").get<long>();
    r.steps = j.at("steps").get<long>();
    r.reward = stat_from_json(j.at("reward"));
    r.length = stat_from_json(j.at("length"));
    for (const auto& a : j.at("active")) r.active.push_back(stat_from_json(a));
    r.episode_rewards = j.at("episode_rewards").get<std::vector<double>>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("eval report: ") + e.what());
  }
}

inline void save_report(const std::string& path, const EvalReport& r) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::IoError, "cannot write " + path);
  os << to_json(r).dump(2) << '\n';
}

inline EvalReport load_report(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::IoError, "cannot read " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
  return report_from_json(j);
}

}  // namespace odec::harness
