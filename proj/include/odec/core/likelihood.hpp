#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "odec/core/open_model.hpp"

namespace odec {

namespace detail {

inline void check_record_shape(const TeamRegistry& registry, const StepRecord& rec) {
  if (rec.state.team != rec.team || rec.action.team != rec.team)
    throw Error(ErrorCode::MalformedRecord, "team id mismatch inside record");
  if (!registry.contains(rec.team))
    throw Error(ErrorCode::MalformedRecord, "unregistered team " + std::to_string(rec.team));
  const auto n = static_cast<std::size_t>(registry.cardinality(rec.team));
  if (rec.state.locals.size() != n || rec.action.actions.size() != n)
    throw Error(ErrorCode::MalformedRecord, "record shape does not match team cardinality");
}

}  // namespace detail

/// ∏_{i ∈ c} π_i(a_i | c, s_i) for one record.
template <LocalPolicy P>
double joint_policy_probability(const TeamRegistry& registry, const P& policies, const StepRecord& rec) {
  const auto& members = registry.members(rec.team);
  double p = 1.0;
  for (std::size_t k = 0; k < members.size(); ++k)
    p *= policies.probability(members[k], rec.team, rec.state.locals[k], rec.action.actions[k]);
  return p;
}

/// Γ(c, a_c, c') times T_c(s, a, s') when c' == c, or T'_c(s, c', s') otherwise.
template <OpenDecisionModel M>
double transition_probability(const M& model, const StepRecord& from, const TeamState& to) {
  const double gamma = probability_of(model.team_transition(from.team, from.action), to.team);
  if (gamma == 0.0) return 0.0;
  const double state_p = (to.team == from.team) ? probability_of(model.intra_transition(from.state, from.action), to)
                                                : probability_of(model.inter_transition(from.state, to.team), to);
  return gamma * state_p;
}

/// Two-step factor without the prior: the policy terms of both records, the
/// team transition, and the intra- or inter-team state transition.
template <OpenDecisionModel M, LocalPolicy P>
double step_likelihood(const M& model, const P& policies, const StepRecord& current, const StepRecord& next) {
  const auto& registry = model.registry();
  detail::check_record_shape(registry, current);
  detail::check_record_shape(registry, next);
  const double trans = transition_probability(model, current, next.state);
  if (trans == 0.0) return 0.0;
  return joint_policy_probability(registry, policies, next) * trans *
         joint_policy_probability(registry, policies, current);
}

/// log ρ(c¹, s¹) + Σ_t log of each policy and transition factor, with every
/// record's policy terms counted once. Returns −∞ for off-support trajectories.
template <OpenDecisionModel M, LocalPolicy P>
double trajectory_log_likelihood(const M& model, const P& policies, const OpenTrajectory& traj) {
  if (traj.empty()) throw Error(ErrorCode::EmptyTrajectory, "trajectory has no records");
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  const auto& registry = model.registry();
  for (const auto& rec : traj.records) detail::check_record_shape(registry, rec);

  const auto log_or_neg_inf = [](double p) { return p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity(); };

  double ll = log_or_neg_inf(probability_of(model.prior(), traj.records.front().state));
  if (ll == kNegInf) return kNegInf;
  ll += log_or_neg_inf(joint_policy_probability(registry, policies, traj.records.front()));
  for (std::size_t t = 0; t + 1 < traj.records.size() && ll != kNegInf; ++t) {
    ll += log_or_neg_inf(transition_probability(model, traj.records[t], traj.records[t + 1].state));
    if (ll == kNegInf) break;
    ll += log_or_neg_inf(joint_policy_probability(registry, policies, traj.records[t + 1]));
  }
  return ll;
}

}  // namespace odec
