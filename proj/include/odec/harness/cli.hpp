#pragma once

#include <filesystem>
#include <iomanip>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "odec/core/likelihood.hpp"
#include "odec/core/toy_model.hpp"
#include "odec/harness/config.hpp"
#include "odec/harness/eval.hpp"
#include "odec/harness/models.hpp"
#include "odec/harness/trajectory_io.hpp"
#include "odec/nn/gradient_check.hpp"

namespace odec::harness {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitRuntime = 2;

namespace detail {

inline bool is_validation_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError:
    case ErrorCode::SchemaError:
    case ErrorCode::IncompatibleReports:
    case ErrorCode::MalformedRecord:
    case ErrorCode::InvalidTeam:
    case ErrorCode::UnknownAgent:
    case ErrorCode::UnknownTeam:
    case ErrorCode::InvalidAction:
    case ErrorCode::EmptyTrajectory:
      return true;
    default:
      return false;
  }
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::IoError, "cannot write " + path);
  os << text;
}

inline std::string report_text(const EvalReport& r) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << r.env << " " << r.mode << " agents=" << r.agents << " episodes=" << r.episodes << " steps=" << r.steps << "\n";
  os << "  episode reward " << r.reward.mean << " +/- " << r.reward.std << "\n";
  os << "  episode length " << r.length.mean << " +/- " << r.length.std << "\n";
  for (std::size_t i = 0; i < r.active.size(); ++i)
    os << "  agent " << i << " active " << r.active[i].mean << " +/- " << r.active[i].std << "\n";
  return os.str();
}

/// Exhaustive sum of trajectory probabilities of the toy model over every
/// length-`len` sequence of well-formed records.
inline double toy_probability_mass(int len) {
  const auto model = toy::model();
  const toy::Policy policy;
  std::vector<StepRecord> records;
  for (TeamId c : {1, 2}) {
    const int n = c == 1 ? 1 : 2;
    for (int bits = 0; bits < (1 << n); ++bits) {
      TeamState s{c, {}};
      for (int k = 0; k < n; ++k) s.locals.push_back({(bits >> k) & 1});
      for (const auto& a : model.joint_actions(s)) records.push_back({c, s, a});
    }
  }
  OpenTrajectory traj;
  traj.records.resize(static_cast<std::size_t>(len));
  double mass = 0.0;
  std::vector<std::size_t> idx(static_cast<std::size_t>(len), 0);
  while (true) {
    for (int t = 0; t < len; ++t) traj.records[static_cast<std::size_t>(t)] = records[idx[static_cast<std::size_t>(t)]];
    mass += std::exp(trajectory_log_likelihood(model, policy, traj));
    std::size_t k = 0;
    for (; k < idx.size(); ++k) {
      if (++idx[k] < records.size()) break;
      idx[k] = 0;
    }
    if (k == idx.size()) break;
  }
  return mass;
}

/// BCE gradient through D on expert records against samples from `p`.
template <class Rng>
double bce_check(Environment& env, const rl::PolicyVector& p, const irl::DiscriminatorModel& d, Rng& rng) {
  auto expert = make_expert(env);
  std::vector<irl::Sample> e, g;
  const auto demos = generate_demonstrations(env, *expert, 4, 1);
  for (std::size_t t = 0; t < 4; ++t) e.push_back({demos[0].trajectory.records[t].state, demos[0].trajectory.records[t].action});
  for (const auto& s : e) g.push_back({s.state, p.act(s.state, rng).action});
  std::vector<const irl::Sample*> ep, gp;
  for (std::size_t k = 0; k < e.size(); ++k) {
    ep.push_back(&e[k]);
    gp.push_back(&g[k]);
  }
  const irl::LogPiFn log_pi = [&](const TeamState& s, const TeamAction& a) { return p.joint_log_prob(s, a); };
  return irl::bce_gradient_error(d, ep, gp, log_pi);
}

}  // namespace detail

/// Gradient checks on every network shape used by training plus the toy likelihood mass.
/// Writes one line per check and returns true when all pass.
inline bool run_selftest(std::ostream& out) {
  bool ok = true;
  auto line = [&](const std::string& name, double value, double bound) {
    const bool pass = value < bound;
    ok = ok && pass;
    out << (pass ? "PASS " : "FAIL ") << name << " " << value << " (< " << bound << ")\n";
  };
  EnvSpec spec;
  for (const std::string name : {"uff", "assembly"}) {
    spec.name = name;
    auto env = make_environment(spec);
    rl::PolicyVector p(*env, rl::NetworkShape{}, 3);
    irl::DiscriminatorModel d(*env, rl::NetworkShape{}, 5);
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g;
    auto random_input = [&](int n) {
      nn::Vector x(n);
      for (int i = 0; i < n; ++i) x[i] = g(rng);
      return x;
    };
    double worst = 0.0;
    for (int i = 0; i < p.agent_count(); ++i)
      worst = std::max(worst, nn::finite_diff_check(p.actor(i), random_input(p.actor(i).input_size())));
    line(name + " actors", worst, 1e-4);
    line(name + " critic", nn::finite_diff_check(p.critic(), random_input(p.critic().input_size())), 1e-4);
    line(name + " reward net", nn::finite_diff_check(d.net(), random_input(d.input_size())), 1e-4);
    line(name + " reward BCE", detail::bce_check(*env, p, d, rng), 1e-4);
  }
  line("toy likelihood mass error", std::abs(detail::toy_probability_mass(3) - 1.0), 1e-6);
  return ok;
}

/// Entry point shared by the `odec` tool and the tests.
inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"open decentralized MDP training and evaluation"};
  app.require_subcommand(1);

  EnvSpec gen_spec;
  std::string gen_mode = "open";
  long gen_steps = 10000;
  std::uint64_t gen_seed = 0;
  std::string gen_out = "demonstrations.jsonl";
  auto* gen = app.add_subcommand("gen-experts", "record scripted-expert demonstrations");
  gen->add_option("--env", gen_spec.name, "uff or assembly")->check(CLI::IsMember({"uff", "assembly"}));
  gen->add_option("--mode", gen_mode, "open or closed")->check(CLI::IsMember({"open", "closed"}));
  gen->add_option("--agents", gen_spec.agents, "team size")->check(CLI::Range(1, 8));
  gen->add_option("--steps", gen_steps, "minimum number of recorded steps")->check(CLI::PositiveNumber);
  gen->add_option("--seed", gen_seed, "base seed");
  gen->add_option("--out", gen_out, "output trajectory file");

  std::string ppo_config;
  auto* train_ppo = app.add_subcommand("train-ppo", "train policies on the designed reward");
  train_ppo->add_option("--config", ppo_config, "experiment config")->required();

  std::string airl_config;
  auto* train_airl = app.add_subcommand("train-airl", "learn a reward and policies from demonstrations");
  train_airl->add_option("--config", airl_config, "experiment config")->required();

  std::string eval_ckpt, eval_out;
  long eval_steps = 10000;
  std::uint64_t eval_seed = 0;
  bool eval_stochastic = false;
  auto* eval = app.add_subcommand("eval", "evaluate a policy checkpoint");
  eval->add_option("--checkpoint", eval_ckpt, "policy checkpoint")->required();
  eval->add_option("--steps", eval_steps, "environment steps")->check(CLI::PositiveNumber);
  eval->add_option("--seed", eval_seed, "evaluation seed");
  eval->add_flag("--stochastic", eval_stochastic, "sample actions instead of taking the mode");
  eval->add_option("--out", eval_out, "write the report as JSON");

  std::string cmp_open, cmp_closed;
  bool cmp_strict = false;
  auto* compare = app.add_subcommand("compare", "compare open and closed evaluation reports");
  compare->add_option("open", cmp_open, "open-mode report")->required();
  compare->add_option("closed", cmp_closed, "closed-mode report")->required();
  compare->add_flag("--strict", cmp_strict, "exit 1 when the directional checks fail");

  std::string render_path;
  long render_episode = 0;
  long render_step = -1;
  auto* render = app.add_subcommand("render", "replay a trajectory file as text frames");
  render->add_option("--trajectories", render_path, "trajectory file")->required();
  render->add_option("--episode", render_episode, "episode index")->check(CLI::NonNegativeNumber);
  render->add_option("--step", render_step, "show only the frame after this many steps");

  std::string score_reward, score_traj;
  auto* score = app.add_subcommand("score", "score trajectories with a learned reward");
  score->add_option("--reward", score_reward, "reward checkpoint")->required();
  score->add_option("--trajectories", score_traj, "trajectory file")->required();

  auto* selftest = app.add_subcommand("selftest", "gradient checks and likelihood oracle");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n" << app.help();
    return kExitInvalid;
  }

  try {
    if (*gen) {
      gen_spec.mode = mode_from_string(gen_mode);
      auto env = make_environment(gen_spec);
      auto expert = make_expert(*env);
      const auto episodes = generate_demonstrations(*env, *expert, gen_steps, gen_seed);
      save_trajectories(gen_out, *env, gen_seed, episodes);
      long steps = 0;
      for (const auto& ep : episodes) steps += static_cast<long>(ep.trajectory.horizon());
      out << "wrote " << episodes.size() << " episodes (" << steps << " steps) to " << gen_out << "\n";
      return kExitOk;
    }
    if (*train_ppo) {
      const ExperimentConfig cfg = load_config(ppo_config);
      const auto env = make_environment(cfg.env);
      rl::PpoTrainer trainer(*env, cfg.ppo);
      const rl::TrainResult result = trainer.train();
      std::filesystem::create_directories(cfg.output_dir);
      const std::filesystem::path dir(cfg.output_dir);
      nn::save_checkpoint((dir / "policies.ckpt").string(), policy_checkpoint(cfg.env, result.policies));
      std::ofstream curve(dir / "curve.csv", std::ios::binary);
      rl::write_curve_csv(curve, result.curve, env->agent_count());
      const EvalReport report = evaluate_policies(result.policies, *env, cfg.eval_steps, cfg.seed);
      save_report((dir / "eval.json").string(), report);
      out << detail::report_text(report);
      return kExitOk;
    }
    if (*train_airl) {
      const ExperimentConfig cfg = load_config(airl_config);
      auto env = make_environment(cfg.env);
      std::vector<Episode> demos;
      if (cfg.demonstrations.empty()) {
        auto expert = make_expert(*env);
        demos = generate_demonstrations(*env, *expert, cfg.demonstration_steps, cfg.seed);
      } else {
        demos = load_trajectories(cfg.demonstrations, env.get()).episodes;
      }
      irl::AirlResult result = irl::train_odec_airl(*env, trajectories_of(demos), cfg.irl);
      std::filesystem::create_directories(cfg.output_dir);
      const std::filesystem::path dir(cfg.output_dir);
      nn::save_checkpoint((dir / "policies.ckpt").string(), policy_checkpoint(cfg.env, result.policies));
      nn::save_checkpoint((dir / "reward.ckpt").string(), reward_checkpoint(cfg.env, result.reward));
      std::ofstream diag(dir / "diagnostics.csv", std::ios::binary);
      irl::write_diagnostics_csv(diag, result.diagnostics);
      const EvalReport report = evaluate_policies(result.policies, *env, cfg.eval_steps, cfg.seed);
      save_report((dir / "eval.json").string(), report);
      if (result.collapsed) out << "discriminator saturated; training stopped early\n";
      out << detail::report_text(report);
      return kExitOk;
    }
    if (*eval) {
      const LoadedPolicies loaded = policies_from_checkpoint(nn::load_checkpoint(eval_ckpt));
      const auto env = make_environment(loaded.spec);
      const EvalReport report = evaluate_policies(loaded.policies, *env, eval_steps, eval_seed, eval_stochastic);
      if (!eval_out.empty()) save_report(eval_out, report);
      out << detail::report_text(report);
      return kExitOk;
    }
    if (*compare) {
      const Comparison c = compare_open_closed(load_report(cmp_open), load_report(cmp_closed));
      out << to_json(c).dump(2) << "\n";
      return (cmp_strict && !c.pass) ? kExitInvalid : kExitOk;
    }
    if (*render) {
      const TrajectoryFile file = load_trajectories(render_path);
      if (render_episode >= static_cast<long>(file.episodes.size()))
        throw Error(ErrorCode::SchemaError, "file holds " + std::to_string(file.episodes.size()) + " episodes");
      EnvSpec spec;
      spec.name = file.header.env;
      spec.mode = mode_from_string(file.header.mode);
      spec.agents = file.header.agents;
      auto env = make_environment(spec);
      if (!(env->registry().teams() == file.header.teams))
        throw Error(ErrorCode::SchemaError, "trajectory teams do not match the environment");
      const Episode& ep = file.episodes[static_cast<std::size_t>(render_episode)];
      const auto& recs = ep.trajectory.records;
      if (render_step > static_cast<long>(recs.size()))
        throw Error(ErrorCode::SchemaError, "episode has " + std::to_string(recs.size()) + " steps");
      TeamState s = env->reset(ep.seed);
      auto show = [&](long t) {
        if (render_step < 0 || render_step == t) out << env->render() << "\n";
      };
      show(0);
      for (std::size_t t = 0; t < recs.size(); ++t) {
        if (!(recs[t].state == s)) throw Error(ErrorCode::MalformedRecord, "replay diverged at step " + std::to_string(t));
        if (render_step < 0 || render_step == static_cast<long>(t) + 1) {
          out << "actions:";
          for (int a : recs[t].action.actions) out << " " << env->action_name(a);
          out << "\n";
        }
        s = env->step(recs[t].action).state;
        show(static_cast<long>(t) + 1);
      }
      return kExitOk;
    }
    if (*score) {
      const LoadedReward loaded = reward_from_checkpoint(nn::load_checkpoint(score_reward));
      const auto env = make_environment(loaded.spec);
      const TrajectoryFile file = load_trajectories(score_traj, env.get());
      const irl::LogPiFn zero = [](const TeamState&, const TeamAction&) { return 0.0; };
      const auto scores = irl::evaluate_learned_reward(loaded.reward, trajectories_of(file.episodes), zero);
      for (std::size_t i = 0; i < scores.size(); ++i) out << i << " " << scores[i] << "\n";
      return kExitOk;
    }
    if (*selftest) return run_selftest(out) ? kExitOk : kExitInvalid;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return detail::is_validation_error(e.code()) ? kExitInvalid : kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitInvalid;
}

}  // namespace odec::harness
