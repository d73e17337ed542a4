#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "odec/core/validate.hpp"
#include "odec/env/experts.hpp"

namespace odec {

/// One recorded episode: the open trajectory plus what the simulator returned.
struct Episode {
  std::uint64_t seed = 0;
  OpenTrajectory trajectory;
  std::vector<double> rewards;
  bool terminal = false;

  double total_reward() const {
    double r = 0.0;
    for (double x : rewards) r += x;
    return r;
  }
  bool operator==(const Episode&) const = default;
};

/// Environment selection shared by the CLI, config files and tests.
struct EnvSpec {
  std::string name = "uff";
  Mode mode = Mode::Open;
  int agents = 2;
  uff::Config uff;
  assembly::Config assembly;
};

inline std::unique_ptr<Environment> make_environment(const EnvSpec& spec) {
  if (spec.name == "uff") {
    uff::Config c = spec.uff;
    c.mode = spec.mode;
    c.max_agents = spec.agents;
    return std::make_unique<uff::UrbanFirefighting>(c);
  }
  if (spec.name == "assembly") {
    if (spec.agents != 2) throw Error(ErrorCode::SchemaError, "assembly has exactly 2 agents");
    assembly::Config c = spec.assembly;
    c.mode = spec.mode;
    return std::make_unique<assembly::FurnitureAssembly>(c);
  }
  throw Error(ErrorCode::SchemaError, "unknown environment '" + spec.name + "'");
}

inline std::unique_ptr<ScriptedExpert> make_expert(const Environment& env) {
  if (const auto* u = dynamic_cast<const uff::UrbanFirefighting*>(&env)) return std::make_unique<uff::Expert>(u->config());
  if (const auto* a = dynamic_cast<const assembly::FurnitureAssembly*>(&env))
    return std::make_unique<assembly::Expert>(a->config());
  throw Error(ErrorCode::SchemaError, "no scripted expert for environment '" + std::string(env.tag()) + "'");
}

inline TrajectoryLimits limits_for(const Environment& env) {
  return {env.local_size(), env.action_count()};
}

/// Runs one episode with `seed`, choosing actions through `policy(state)`.
template <class PolicyFn>
Episode run_episode(Environment& env, PolicyFn&& policy, std::uint64_t seed) {
  Episode ep;
  ep.seed = seed;
  TeamState s = env.reset(seed);
  while (true) {
    TeamAction a = policy(s);
    ep.trajectory.records.push_back({s.team, s, a});
    StepResult r = env.step(a);
    ep.rewards.push_back(r.reward);
    s = std::move(r.state);
    if (r.done) {
      ep.terminal = r.terminal;
      return ep;
    }
  }
}

/// Expert episodes until at least `total_steps` steps are recorded.
/// Episode k is reset with mix_seed(seed, k).
inline std::vector<Episode> generate_demonstrations(Environment& env, ScriptedExpert& expert, long total_steps,
                                                    std::uint64_t seed) {
  if (total_steps <= 0) throw Error(ErrorCode::SchemaError, "total_steps must be positive");
  std::vector<Episode> out;
  long steps = 0;
  for (std::uint64_t k = 0; steps < total_steps; ++k) {
    Episode ep = run_episode(env, [&](const TeamState& s) { return expert.act(s); }, mix_seed(seed, k));
    if (!ep.terminal)
      throw Error(ErrorCode::ExpertStall, "expert did not finish episode " + std::to_string(k) + " within " +
                                              std::to_string(env.horizon()) + " steps; final state:\n" + env.render());
    const auto violations = validate_trajectory(ep.trajectory, env.registry(), limits_for(env));
    if (!violations.empty())
      throw Error(ErrorCode::MalformedRecord, "expert produced an invalid record: " + violations.front().detail);
    steps += static_cast<long>(ep.trajectory.horizon());
    out.push_back(std::move(ep));
  }
  return out;
}

/// Replays recorded actions from the episode's seed; returns false on the first divergence.
inline bool replay_matches(Environment& env, const Episode& ep) {
  TeamState s = env.reset(ep.seed);
  for (std::size_t t = 0; t < ep.trajectory.records.size(); ++t) {
    const auto& rec = ep.trajectory.records[t];
    if (!(rec.state == s)) return false;
    StepResult r = env.step(rec.action);
    if (r.reward != ep.rewards[t]) return false;
    if (r.done != (t + 1 == ep.trajectory.records.size())) return false;
    s = std::move(r.state);
  }
  return true;
}

}  // namespace odec
