#pragma once

#include <compare>
#include <cstddef>
#include <utility>
#include <vector>

#include "odec/core/team_registry.hpp"

namespace odec {

/// Fixed-length discrete feature vector observed by one agent.
using LocalState = std::vector<int>;

/// Members' local states, ascending agent id.
struct TeamState {
  TeamId team = 0;
  std::vector<LocalState> locals;

  auto operator<=>(const TeamState&) const = default;
  bool operator==(const TeamState&) const = default;
};

/// Members' action indices, ascending agent id.
struct TeamAction {
  TeamId team = 0;
  std::vector<int> actions;

  auto operator<=>(const TeamAction&) const = default;
  bool operator==(const TeamAction&) const = default;
};

/// One ⟨c, s_c, a_c⟩ triple of an open trajectory.
struct StepRecord {
  TeamId team = 0;
  TeamState state;
  TeamAction action;

  bool operator==(const StepRecord&) const = default;
};

struct OpenTrajectory {
  std::vector<StepRecord> records;

  std::size_t horizon() const noexcept { return records.size(); }
  bool empty() const noexcept { return records.empty(); }
  bool operator==(const OpenTrajectory&) const = default;
};

/// Enumerated support of a discrete distribution.
template <class T>
using Distribution = std::vector<std::pair<T, double>>;

template <class T>
double probability_of(const Distribution<T>& dist, const T& value) {
  double p = 0.0;
  for (const auto& [v, w] : dist)
    if (v == value) p += w;
  return p;
}

template <class T>
double total_mass(const Distribution<T>& dist) {
  double m = 0.0;
  for (const auto& entry : dist) m += entry.second;
  return m;
}

}  // namespace odec
