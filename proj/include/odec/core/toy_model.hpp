#pragma once

#include <array>

#include "odec/core/open_model.hpp"

namespace odec::toy {

/// Two agents, teams {0} and {0, 1}, one binary local feature each.
/// Agent 0 acts with {stay, flip, call}; agent 1 with {stay, flip}.
inline constexpr int kStay = 0;
inline constexpr int kFlip = 1;
inline constexpr int kCall = 2;
inline constexpr double kJoinProbability = 0.7;

inline TeamRegistry registry() {
  TeamRegistry r(2);
  r.register_team({0});
  r.register_team({0, 1});
  return r;
}

/// Probability that a bit ends at 1 after `action`.
inline double bit_one(int bit, int action) {
  const double keep = action == kFlip ? 0.2 : 0.9;
  return bit == 1 ? keep : 1.0 - keep;
}

inline Distribution<TeamState> intra(const TeamState& s, const TeamAction& a) {
  Distribution<TeamState> out;
  const std::size_t n = s.locals.size();
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    TeamState next{s.team, {}};
    double p = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
      const int bit = (mask >> k) & 1u;
      const double one = bit_one(s.locals[k][0], a.actions[k]);
      p *= bit ? one : 1.0 - one;
      next.locals.push_back({bit});
    }
    out.emplace_back(std::move(next), p);
  }
  return out;
}

inline FunctionalOpenModel model(double discount = 0.9) {
  FunctionalOpenModel m;
  m.team_registry = registry();
  m.gamma_fn = [](TeamId c, const TeamAction& a) -> Distribution<TeamId> {
    if (c == 1 && a.actions[0] == kCall) return {{1, 1.0 - kJoinProbability}, {2, kJoinProbability}};
    return {{c, 1.0}};
  };
  m.intra_fn = intra;
  m.inter_fn = [](const TeamState& s, TeamId next) -> Distribution<TeamState> {
    if (s.team != 1 || next != 2) throw Error(ErrorCode::InvalidTeam, "toy model only grows from {0} to {0,1}");
    return {{TeamState{2, {s.locals[0], {0}}}, 0.5}, {TeamState{2, {s.locals[0], {1}}}, 0.5}};
  };
  m.reward_fn = [](const TeamState& s, const TeamAction& a) {
    double r = -0.2 * double(s.locals.size());
    for (const auto& l : s.locals) r += l[0];
    if (a.actions[0] == kCall) r -= 0.1;
    return r;
  };
  m.start = {{TeamState{1, {{0}}}, 0.6}, {TeamState{1, {{1}}}, 0.4}};
  m.gamma = discount;
  m.actions_fn = [](const TeamState& s) {
    return s.team == 1 ? product_actions(1, {3}) : product_actions(2, {3, 2});
  };
  return m;
}

/// Fixed stochastic local policies.
struct Policy {
  double probability(AgentId i, TeamId c, const LocalState& s, int a) const {
    static constexpr std::array<std::array<double, 3>, 2> solo{{{0.5, 0.3, 0.2}, {0.2, 0.6, 0.2}}};
    static constexpr std::array<double, 3> lead{0.4, 0.4, 0.2};
    static constexpr std::array<std::array<double, 2>, 2> helper{{{0.7, 0.3}, {0.25, 0.75}}};
    if (i == 0) {
      if (a < 0 || a > 2) return 0.0;
      return c == 1 ? solo[static_cast<std::size_t>(s[0])][static_cast<std::size_t>(a)] : lead[static_cast<std::size_t>(a)];
    }
    if (c != 2 || a < 0 || a > 1) return 0.0;
    return helper[static_cast<std::size_t>(s[0])][static_cast<std::size_t>(a)];
  }
};

}  // namespace odec::toy
