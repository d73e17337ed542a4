#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <type_traits>

#include "odec/env/demonstrations.hpp"
#include "odec/irl/airl.hpp"

namespace odec::harness {

/// Everything one experiment needs. Loaded from a flat `key = value` file;
/// `#` starts a comment and unknown keys are rejected.
struct ExperimentConfig {
  EnvSpec env;
  rl::TrainingConfig ppo;
  irl::AirlConfig irl;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  std::string demonstrations;
  long demonstration_steps = 10000;  // expert steps generated when no file is given
  long eval_steps = 10000;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& v) {
  std::istringstream is(v);
  T out{};
  is >> out;
  if (is.fail() || !is.eof()) throw Error(ErrorCode::SchemaError, "'" + key + "' expects a number, got '" + v + "'");
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw Error(ErrorCode::SchemaError, "'" + key + "' expects true or false, got '" + v + "'");
}

inline std::vector<int> parse_widths(const std::string& key, const std::string& v) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const int w = parse_number<int>(key, trim(item));
    if (w <= 0) throw Error(ErrorCode::SchemaError, "'" + key + "' widths must be positive");
    out.push_back(w);
  }
  if (out.empty()) throw Error(ErrorCode::SchemaError, "'" + key + "' needs at least one width");
  return out;
}

inline std::string strip_code(const std::string& what) {
  const auto p = what.find(": ");
  return p == std::string::npos ? what : what.substr(p + 2);
}

}  // namespace detail

using ConfigSetter = std::function<void(ExperimentConfig&, const std::string&)>;

inline const std::map<std::string, ConfigSetter>& config_schema() {
  using detail::parse_bool;
  using detail::parse_number;
  using detail::parse_widths;
  static const std::map<std::string, ConfigSetter> schema = [] {
    std::map<std::string, ConfigSetter> m;
    auto real = [&m](const std::string& key, auto field) {
      m[key] = [key, field](ExperimentConfig& c, const std::string& v) { field(c) = parse_number<double>(key, v); };
    };
    auto integer = [&m](const std::string& key, auto field) {
      m[key] = [key, field](ExperimentConfig& c, const std::string& v) {
        field(c) = parse_number<std::decay_t<decltype(field(c))>>(key, v);
      };
    };
    auto boolean = [&m](const std::string& key, auto field) {
      m[key] = [key, field](ExperimentConfig& c, const std::string& v) { field(c) = parse_bool(key, v); };
    };
    m["env"] = [](ExperimentConfig& c, const std::string& v) { c.env.name = v; };
    m["mode"] = [](ExperimentConfig& c, const std::string& v) { c.env.mode = mode_from_string(v); };
    integer("agents", [](ExperimentConfig& c) -> int& { return c.env.agents; });
    integer("seed", [](ExperimentConfig& c) -> std::uint64_t& { return c.seed; });
    m["output_dir"] = [](ExperimentConfig& c, const std::string& v) { c.output_dir = v; };
    m["demonstrations"] = [](ExperimentConfig& c, const std::string& v) { c.demonstrations = v; };
    integer("demonstration_steps", [](ExperimentConfig& c) -> long& { return c.demonstration_steps; });
    integer("eval_steps", [](ExperimentConfig& c) -> long& { return c.eval_steps; });

    real("uff.step_cost", [](ExperimentConfig& c) -> double& { return c.env.uff.step_cost_per_active_agent; });
    real("uff.extinguish_reward", [](ExperimentConfig& c) -> double& { return c.env.uff.extinguish_reward_per_delta; });
    real("uff.completion_bonus", [](ExperimentConfig& c) -> double& { return c.env.uff.completion_bonus; });
    integer("uff.horizon", [](ExperimentConfig& c) -> int& { return c.env.uff.horizon; });
    integer("uff.start_cell", [](ExperimentConfig& c) -> int& { return c.env.uff.start_cell; });
    integer("uff.spawn_cell", [](ExperimentConfig& c) -> int& { return c.env.uff.spawn_cell; });
    boolean("uff.extinguish_stacks", [](ExperimentConfig& c) -> bool& { return c.env.uff.extinguish_stacks; });

    real("assembly.step_cost", [](ExperimentConfig& c) -> double& { return c.env.assembly.step_cost; });
    real("assembly.human_cost_multiplier",
         [](ExperimentConfig& c) -> double& { return c.env.assembly.human_cost_multiplier; });
    real("assembly.subtask_reward", [](ExperimentConfig& c) -> double& { return c.env.assembly.subtask_completion_reward; });
    real("assembly.completion_bonus", [](ExperimentConfig& c) -> double& { return c.env.assembly.completion_bonus; });
    integer("assembly.horizon", [](ExperimentConfig& c) -> int& { return c.env.assembly.horizon; });

    real("ppo.discount", [](ExperimentConfig& c) -> double& { return c.ppo.discount; });
    real("ppo.clip", [](ExperimentConfig& c) -> double& { return c.ppo.clip; });
    real("ppo.entropy", [](ExperimentConfig& c) -> double& { return c.ppo.entropy_coef; });
    integer("ppo.epochs", [](ExperimentConfig& c) -> int& { return c.ppo.epochs; });
    integer("ppo.minibatch", [](ExperimentConfig& c) -> int& { return c.ppo.minibatch; });
    integer("ppo.rollout", [](ExperimentConfig& c) -> int& { return c.ppo.rollout; });
    real("ppo.actor_lr", [](ExperimentConfig& c) -> double& { return c.ppo.actor_lr; });
    real("ppo.critic_lr", [](ExperimentConfig& c) -> double& { return c.ppo.critic_lr; });
    real("ppo.max_grad_norm", [](ExperimentConfig& c) -> double& { return c.ppo.max_grad_norm; });
    boolean("ppo.anneal", [](ExperimentConfig& c) -> bool& { return c.ppo.anneal; });
    integer("ppo.total_steps", [](ExperimentConfig& c) -> long& { return c.ppo.total_steps; });
    m["ppo.hidden"] = [](ExperimentConfig& c, const std::string& v) { c.ppo.network.hidden = parse_widths("ppo.hidden", v); };

    integer("irl.discriminator_epochs", [](ExperimentConfig& c) -> int& { return c.irl.discriminator_epochs; });
    integer("irl.generator_epochs", [](ExperimentConfig& c) -> int& { return c.irl.generator_epochs; });
    real("irl.discriminator_lr", [](ExperimentConfig& c) -> double& { return c.irl.discriminator_lr; });
    integer("irl.discriminator_minibatch", [](ExperimentConfig& c) -> int& { return c.irl.discriminator_minibatch; });
    integer("irl.collapse_patience", [](ExperimentConfig& c) -> int& { return c.irl.collapse_patience; });
    m["irl.hidden"] = [](ExperimentConfig& c, const std::string& v) {
      c.irl.discriminator_network.hidden = parse_widths("irl.hidden", v);
    };
    return m;
  }();
  return schema;
}

/// Parses a config stream. Relative paths are resolved against `base_dir`.
inline ExperimentConfig parse_config(std::istream& is, const std::filesystem::path& base_dir = {}) {
  ExperimentConfig c;
  std::map<std::string, int> seen;
  std::string raw;
  int line_no = 0;
  while (std::getline(is, raw)) {
    ++line_no;
    std::string line = raw.substr(0, raw.find('#'));
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::ParseError, "config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    const auto& schema = config_schema();
    auto it = schema.find(key);
    if (it == schema.end())
      throw Error(ErrorCode::SchemaError, "config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    if (seen.count(key))
      throw Error(ErrorCode::SchemaError, "config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    seen[key] = line_no;
    try {
      it->second(c, value);
    } catch (const Error& e) {
      throw Error(e.code(), "config line " + std::to_string(line_no) + ": " + detail::strip_code(e.what()));
    }
  }
  // The experiment seed drives every component unless they were pinned separately.
  c.ppo.seed = c.seed;
  c.irl.generator = c.ppo;
  c.ppo.validate();
  make_environment(c.env);  // rejects inconsistent environment settings early
  if (!c.demonstrations.empty()) {
    std::filesystem::path p(c.demonstrations);
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    if (!std::filesystem::exists(p))
      throw Error(ErrorCode::SchemaError, "demonstrations file '" + p.string() + "' does not exist");
    c.demonstrations = p.string();
  }
  if (!c.output_dir.empty()) {
    std::filesystem::path p(c.output_dir);
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    c.output_dir = p.string();
  }
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::IoError, "cannot read " + path);
  return parse_config(is, std::filesystem::path(path).parent_path());
}

}  // namespace odec::harness
