#pragma once

#include <cmath>
#include <concepts>
#include <functional>
#include <string>
#include <vector>

#include "odec/core/types.hpp"
#include "odec/error.hpp"

namespace odec {

/// Mass tolerance for every enumerated distribution.
inline constexpr double kDistributionTolerance = 1e-9;

/// An open decentralized MDP ⟨Ag, C, S, A, Γ, T, R, ρ⟩ plus a discount.
///
/// `team_transition` is Γ(c, a_c, ·); `intra_transition` is T_c(s_c, a_c, ·)
/// and is only consulted when the team is unchanged; `inter_transition` is
/// T'_c(s_c, c', ·) and is only consulted when the team changes to c'.
template <class M>
concept OpenDecisionModel = requires(const M& m, const TeamState& s, const TeamAction& a, TeamId c) {
  { m.registry() } -> std::convertible_to<const TeamRegistry&>;
  { m.team_transition(c, a) } -> std::convertible_to<Distribution<TeamId>>;
  { m.intra_transition(s, a) } -> std::convertible_to<Distribution<TeamState>>;
  { m.inter_transition(s, c) } -> std::convertible_to<Distribution<TeamState>>;
  { m.reward(s, a) } -> std::convertible_to<double>;
  { m.prior() } -> std::convertible_to<Distribution<TeamState>>;
  { m.discount() } -> std::convertible_to<double>;
};

/// A model whose joint actions can be listed per team state, which is what
/// exact planning and exhaustive likelihood checks need.
template <class M>
concept EnumerableOpenModel = OpenDecisionModel<M> && requires(const M& m, const TeamState& s) {
  { m.joint_actions(s) } -> std::convertible_to<std::vector<TeamAction>>;
  { m.is_terminal(s) } -> std::convertible_to<bool>;
};

/// Per-agent stochastic policy π_i(a | c, s_i).
template <class P>
concept LocalPolicy = requires(const P& p, AgentId i, TeamId c, const LocalState& s, int a) {
  { p.probability(i, c, s, a) } -> std::convertible_to<double>;
};

/// Model assembled from callables; convenient for small hand-built instances.
struct FunctionalOpenModel {
  TeamRegistry team_registry;
  std::function<Distribution<TeamId>(TeamId, const TeamAction&)> gamma_fn;
  std::function<Distribution<TeamState>(const TeamState&, const TeamAction&)> intra_fn;
  std::function<Distribution<TeamState>(const TeamState&, TeamId)> inter_fn;
  std::function<double(const TeamState&, const TeamAction&)> reward_fn;
  Distribution<TeamState> start;
  double gamma = 0.9;
  std::function<std::vector<TeamAction>(const TeamState&)> actions_fn;
  std::function<bool(const TeamState&)> terminal_fn;

  const TeamRegistry& registry() const { return team_registry; }
  Distribution<TeamId> team_transition(TeamId c, const TeamAction& a) const { return gamma_fn(c, a); }
  Distribution<TeamState> intra_transition(const TeamState& s, const TeamAction& a) const { return intra_fn(s, a); }
  Distribution<TeamState> inter_transition(const TeamState& s, TeamId next) const { return inter_fn(s, next); }
  double reward(const TeamState& s, const TeamAction& a) const { return reward_fn(s, a); }
  Distribution<TeamState> prior() const { return start; }
  double discount() const { return gamma; }
  std::vector<TeamAction> joint_actions(const TeamState& s) const {
    if (!actions_fn) throw Error(ErrorCode::UnsupportedModel, "joint actions are not enumerable");
    return actions_fn(s);
  }
  bool is_terminal(const TeamState& s) const { return terminal_fn ? terminal_fn(s) : false; }
};

/// Throws SchemaError when a distribution has negative weights or its mass is off by more than 1e-9.
template <class T>
void check_distribution(const Distribution<T>& dist, const std::string& what) {
  double mass = 0.0;
  for (const auto& [value, p] : dist) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw Error(ErrorCode::SchemaError, what + ": invalid probability");
    mass += p;
  }
  if (std::abs(mass - 1.0) > kDistributionTolerance)
    throw Error(ErrorCode::SchemaError, what + ": mass " + std::to_string(mass));
}

/// Cartesian product of per-member action sets, members ascending.
inline std::vector<TeamAction> product_actions(TeamId team, const std::vector<int>& action_counts) {
  std::vector<TeamAction> out;
  TeamAction cur{team, std::vector<int>(action_counts.size(), 0)};
  if (action_counts.empty()) return out;
  while (true) {
    out.push_back(cur);
    std::size_t k = 0;
    for (; k < action_counts.size(); ++k) {
      if (++cur.actions[k] < action_counts[k]) break;
      cur.actions[k] = 0;
    }
    if (k == action_counts.size()) break;
  }
  return out;
}

}  // namespace odec
