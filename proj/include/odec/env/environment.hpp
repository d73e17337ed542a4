#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "odec/core/types.hpp"
#include "odec/error.hpp"

namespace odec {

/// Open: the episode starts with a sub-team and agents are called in.
/// Closed: the full team is present from reset and CallAgent is disabled.
enum class Mode { Open, Closed };

inline std::string_view to_string(Mode m) { return m == Mode::Open ? "open" : "closed"; }

inline Mode mode_from_string(std::string_view s) {
  if (s == "open") return Mode::Open;
  if (s == "closed") return Mode::Closed;
  throw Error(ErrorCode::SchemaError, "mode must be 'open' or 'closed', got '" + std::string(s) + "'");
}

struct StepResult {
  TeamState state;
  double reward = 0.0;
  bool done = false;
  /// True when the episode ended because the task finished (not the horizon).
  bool terminal = false;
};

/// splitmix64; used to derive independent per-episode seeds from one base seed.
constexpr std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Episodic simulator for one open-team domain.
///
/// Every agent has the same action set. Team states and actions list
/// members in ascending agent id. Instances own their RNG and are not
/// shared between threads; use `clone()` for parallel workers.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string_view tag() const = 0;
  virtual Mode mode() const = 0;
  virtual const TeamRegistry& registry() const = 0;
  virtual int agent_count() const = 0;
  virtual int action_count() const = 0;
  virtual std::string_view action_name(int action) const = 0;
  virtual int call_action() const = 0;
  virtual std::size_t local_size() const = 0;
  virtual int horizon() const = 0;

  /// Width of the real-valued encoding of one local state.
  virtual int local_feature_size() const = 0;
  virtual void encode_local(const LocalState& local, std::span<double> out) const = 0;

  virtual TeamState reset(std::uint64_t seed) = 0;
  virtual StepResult step(const TeamAction& action) = 0;
  virtual const TeamState& state() const = 0;
  virtual int elapsed() const = 0;

  /// Text frame describing the current state; stable across runs.
  virtual std::string render() const = 0;
  virtual std::unique_ptr<Environment> clone() const = 0;

  /// Actions a policy may choose from. Closed mode masks CallAgent.
  std::vector<bool> action_mask() const {
    std::vector<bool> mask(static_cast<std::size_t>(action_count()), true);
    if (mode() == Mode::Closed) mask[static_cast<std::size_t>(call_action())] = false;
    return mask;
  }
};

inline void check_team_action(const Environment& env, const TeamState& state, const TeamAction& action) {
  if (action.team != state.team)
    throw Error(ErrorCode::InvalidAction, "action team " + std::to_string(action.team) + " != current team " +
                                              std::to_string(state.team));
  if (action.actions.size() != state.locals.size())
    throw Error(ErrorCode::InvalidAction, "expected one action per active agent");
  for (int a : action.actions)
    if (a < 0 || a >= env.action_count()) throw Error(ErrorCode::InvalidAction, "action index " + std::to_string(a));
}

}  // namespace odec
