#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "odec/core/open_model.hpp"

namespace odec {

enum class ViolationRule {
  UnknownTeam,
  TeamMismatch,
  ShapeMismatch,
  LocalShape,
  ActionOutOfRange,
  UnreachableTeamChange,
};

constexpr std::string_view to_string(ViolationRule r) {
  switch (r) {
    case ViolationRule::UnknownTeam: return "UnknownTeam";
    case ViolationRule::TeamMismatch: return "TeamMismatch";
    case ViolationRule::ShapeMismatch: return "ShapeMismatch";
    case ViolationRule::LocalShape: return "LocalShape";
    case ViolationRule::ActionOutOfRange: return "ActionOutOfRange";
    case ViolationRule::UnreachableTeamChange: return "UnreachableTeamChange";
  }
  return "?";
}

struct Violation {
  std::size_t index;
  ViolationRule rule;
  std::string detail;
};

/// Optional per-environment limits checked in addition to the structural rules.
struct TrajectoryLimits {
  std::optional<std::size_t> local_size;
  std::optional<int> action_count;
};

inline std::vector<Violation> validate_trajectory(const OpenTrajectory& traj, const TeamRegistry& registry,
                                                  const TrajectoryLimits& limits = {}) {
  std::vector<Violation> out;
  for (std::size_t t = 0; t < traj.records.size(); ++t) {
    const auto& rec = traj.records[t];
    if (rec.state.team != rec.team || rec.action.team != rec.team) {
      out.push_back({t, ViolationRule::TeamMismatch, "record/state/action team ids differ"});
      continue;
    }
    if (!registry.contains(rec.team)) {
      out.push_back({t, ViolationRule::UnknownTeam, "team " + std::to_string(rec.team) + " not registered"});
      continue;
    }
    const auto n = static_cast<std::size_t>(registry.cardinality(rec.team));
    if (rec.state.locals.size() != n || rec.action.actions.size() != n) {
      out.push_back({t, ViolationRule::ShapeMismatch,
                     "expected " + std::to_string(n) + " members, got " + std::to_string(rec.state.locals.size()) +
                         " states and " + std::to_string(rec.action.actions.size()) + " actions"});
      continue;
    }
    if (limits.local_size) {
      for (const auto& l : rec.state.locals)
        if (l.size() != *limits.local_size) {
          out.push_back({t, ViolationRule::LocalShape, "local state length " + std::to_string(l.size())});
          break;
        }
    }
    if (limits.action_count) {
      for (int a : rec.action.actions)
        if (a < 0 || a >= *limits.action_count) {
          out.push_back({t, ViolationRule::ActionOutOfRange, "action " + std::to_string(a)});
          break;
        }
    }
  }
  return out;
}

/// Structural checks plus: every consecutive team change has nonzero Γ mass.
template <OpenDecisionModel M>
std::vector<Violation> validate_trajectory(const OpenTrajectory& traj, const M& model,
                                           const TrajectoryLimits& limits = {}) {
  auto out = validate_trajectory(traj, model.registry(), limits);
  if (!out.empty()) return out;
  for (std::size_t t = 0; t + 1 < traj.records.size(); ++t) {
    const auto& rec = traj.records[t];
    if (probability_of(model.team_transition(rec.team, rec.action), traj.records[t + 1].team) == 0.0)
      out.push_back({t + 1, ViolationRule::UnreachableTeamChange,
                     "team " + std::to_string(rec.team) + " -> " + std::to_string(traj.records[t + 1].team)});
  }
  return out;
}

}  // namespace odec
