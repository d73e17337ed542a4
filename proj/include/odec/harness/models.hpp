#pragma once

#include <cstdio>
#include <string>

#include "odec/env/demonstrations.hpp"
#include "odec/irl/discriminator.hpp"
#include "odec/nn/checkpoint.hpp"
#include "odec/rl/policy.hpp"

namespace odec::harness {

inline std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// Environment settings stored alongside networks so a checkpoint is self-describing.
inline void write_env_meta(nn::Checkpoint& ckpt, const EnvSpec& spec) {
  auto& m = ckpt.meta;
  m["env"] = spec.name;
  m["mode"] = std::string(to_string(spec.mode));
  m["agents"] = std::to_string(spec.agents);
  m["uff.step_cost"] = format_real(spec.uff.step_cost_per_active_agent);
  m["uff.extinguish_reward"] = format_real(spec.uff.extinguish_reward_per_delta);
  m["uff.completion_bonus"] = format_real(spec.uff.completion_bonus);
  m["uff.horizon"] = std::to_string(spec.uff.horizon);
  m["uff.start_cell"] = std::to_string(spec.uff.start_cell);
  m["uff.spawn_cell"] = std::to_string(spec.uff.spawn_cell);
  m["uff.extinguish_stacks"] = spec.uff.extinguish_stacks ? "true" : "false";
  m["assembly.step_cost"] = format_real(spec.assembly.step_cost);
  m["assembly.human_cost_multiplier"] = format_real(spec.assembly.human_cost_multiplier);
  m["assembly.subtask_reward"] = format_real(spec.assembly.subtask_completion_reward);
  m["assembly.completion_bonus"] = format_real(spec.assembly.completion_bonus);
  m["assembly.horizon"] = std::to_string(spec.assembly.horizon);
}

inline EnvSpec read_env_meta(const nn::Checkpoint& ckpt) {
  EnvSpec s;
  auto real = [&](const char* k) { return std::stod(ckpt.meta_value(k)); };
  auto integer = [&](const char* k) { return std::stoi(ckpt.meta_value(k)); };
  try {
    s.name = ckpt.meta_value("env");
    s.mode = mode_from_string(ckpt.meta_value("mode"));
    s.agents = integer("agents");
    s.uff.step_cost_per_active_agent = real("uff.step_cost");
    s.uff.extinguish_reward_per_delta = real("uff.extinguish_reward");
    s.uff.completion_bonus = real("uff.completion_bonus");
    s.uff.horizon = integer("uff.horizon");
    s.uff.start_cell = integer("uff.start_cell");
    s.uff.spawn_cell = integer("uff.spawn_cell");
    s.uff.extinguish_stacks = ckpt.meta_value("uff.extinguish_stacks") == "true";
    s.assembly.step_cost = real("assembly.step_cost");
    s.assembly.human_cost_multiplier = real("assembly.human_cost_multiplier");
    s.assembly.subtask_completion_reward = real("assembly.subtask_reward");
    s.assembly.completion_bonus = real("assembly.completion_bonus");
    s.assembly.horizon = integer("assembly.horizon");
  } catch (const std::logic_error& e) {
    throw Error(ErrorCode::SchemaError, std::string("checkpoint metadata: ") + e.what());
  }
  return s;
}

inline nn::Checkpoint policy_checkpoint(const EnvSpec& spec, const rl::PolicyVector& p) {
  nn::Checkpoint c;
  write_env_meta(c, spec);
  c.meta["kind"] = "policies";
  for (int i = 0; i < p.agent_count(); ++i) c.nets.emplace_back("actor" + std::to_string(i), p.actor(i));
  c.nets.emplace_back("critic", p.critic());
  return c;
}

struct LoadedPolicies {
  EnvSpec spec;
  rl::PolicyVector policies;
};

inline LoadedPolicies policies_from_checkpoint(const nn::Checkpoint& c) {
  if (c.meta_value("kind") != "policies") throw Error(ErrorCode::SchemaError, "checkpoint does not hold policies");
  LoadedPolicies out{read_env_meta(c), {}};
  const auto env = make_environment(out.spec);
  std::vector<nn::Mlp> actors;
  for (int i = 0; i < env->agent_count(); ++i) actors.push_back(c.net("actor" + std::to_string(i)));
  out.policies = rl::PolicyVector(*env, std::move(actors), c.net("critic"));
  return out;
}

inline nn::Checkpoint reward_checkpoint(const EnvSpec& spec, const irl::LearnedReward& r) {
  nn::Checkpoint c;
  write_env_meta(c, spec);
  c.meta["kind"] = "reward";
  c.nets.emplace_back("f", r.model().net());
  return c;
}

struct LoadedReward {
  EnvSpec spec;
  irl::LearnedReward reward;
};

inline LoadedReward reward_from_checkpoint(const nn::Checkpoint& c) {
  if (c.meta_value("kind") != "reward") throw Error(ErrorCode::SchemaError, "checkpoint does not hold a reward");
  LoadedReward out{read_env_meta(c), {}};
  const auto env = make_environment(out.spec);
  out.reward = irl::LearnedReward(irl::DiscriminatorModel(*env, c.net("f")));
  return out;
}

}  // namespace odec::harness
