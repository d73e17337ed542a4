#include <cmath>
#include <map>

#include "odec/core/toy_model.hpp"
#include "odec/core/value_iteration.hpp"
#include "support.hpp"

using namespace odec;

namespace {

FunctionalOpenModel single_state(double reward, double discount) {
  FunctionalOpenModel m;
  m.team_registry = TeamRegistry(1);
  m.team_registry.register_team({0});
  m.gamma_fn = [](TeamId c, const TeamAction&) { return Distribution<TeamId>{{c, 1.0}}; };
  m.intra_fn = [](const TeamState& s, const TeamAction&) { return Distribution<TeamState>{{s, 1.0}}; };
  m.inter_fn = [](const TeamState& s, TeamId) { return Distribution<TeamState>{{s, 1.0}}; };
  m.reward_fn = [reward](const TeamState&, const TeamAction&) { return reward; };
  m.start = {{TeamState{1, {{0}}}, 1.0}};
  m.gamma = discount;
  m.actions_fn = [](const TeamState& s) { return product_actions(s.team, {2}); };
  return m;
}

/// Teams {0} and {1} hand a three-valued counter back and forth.
/// Action 1 switches the team; the incoming agent starts one past the counter.
FunctionalOpenModel relay(double discount) {
  FunctionalOpenModel m;
  m.team_registry = TeamRegistry(2);
  m.team_registry.register_team({0});
  m.team_registry.register_team({1});
  m.gamma_fn = [](TeamId c, const TeamAction& a) {
    return Distribution<TeamId>{{a.actions[0] == 1 ? 3 - c : c, 1.0}};
  };
  m.intra_fn = [](const TeamState& s, const TeamAction&) {
    return Distribution<TeamState>{{TeamState{s.team, {{(s.locals[0][0] + 2) % 3}}}, 1.0}};
  };
  m.inter_fn = [](const TeamState& s, TeamId next) {
    return Distribution<TeamState>{{TeamState{next, {{(s.locals[0][0] + 1) % 3}}}, 1.0}};
  };
  m.reward_fn = [](const TeamState& s, const TeamAction&) { return s.locals[0][0] == 2 ? 1.0 : 0.0; };
  m.start = {{TeamState{1, {{0}}}, 1.0}};
  m.gamma = discount;
  m.actions_fn = [](const TeamState& s) { return product_actions(s.team, {2}); };
  return m;
}

/// Finite-horizon expectimax computed straight from the model's distributions.
class Expectimax {
 public:
  explicit Expectimax(const FunctionalOpenModel& m) : m_(m) {}

  double value(const TeamState& s, int depth) {
    if (depth == 0 || m_.is_terminal(s)) return 0.0;
    auto key = std::make_pair(s, depth);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& a : m_.joint_actions(s)) {
      double q = m_.reward(s, a);
      for (const auto& [c, pc] : m_.team_transition(s.team, a)) {
        const auto next = c == s.team ? m_.intra_transition(s, a) : m_.inter_transition(s, c);
        for (const auto& [s2, ps] : next) q += m_.discount() * pc * ps * value(s2, depth - 1);
      }
      best = std::max(best, q);
    }
    memo_[key] = best;
    return best;
  }

 private:
  const FunctionalOpenModel& m_;
  std::map<std::pair<TeamState, int>, double> memo_;
};

double max_abs_reward(const FunctionalOpenModel& m, const ValueTable& vt) {
  double r = 0.0;
  for (const auto& [s, v] : vt.values)
    for (const auto& a : m.joint_actions(s)) r = std::max(r, std::abs(m.reward(s, a)));
  return r;
}

void expect_matches_expectimax(const FunctionalOpenModel& m) {
  const ValueTable vt = value_iteration(m, {1e-12});
  Expectimax oracle(m);
  const double gamma = m.discount();
  const double bound = 1e-6 + std::pow(gamma, 50) * max_abs_reward(m, vt) / (1.0 - gamma);
  ASSERT_FALSE(vt.values.empty());
  for (const auto& [s, v] : vt.values) EXPECT_NEAR(v, oracle.value(s, 50), bound);
}

}  // namespace

TEST(ValueIteration, GeometricSeries) {
  const ValueTable vt = value_iteration(single_state(1.0, 0.9), {1e-12});
  EXPECT_NEAR(vt.at(TeamState{1, {{0}}}), 10.0, 1e-9);
}

TEST(ValueIteration, ZeroRewardGivesZeroValues) {
  const auto m = toy::model();
  FunctionalOpenModel zero = m;
  zero.reward_fn = [](const TeamState&, const TeamAction&) { return 0.0; };
  for (const auto& [s, v] : value_iteration(zero).values) EXPECT_EQ(v, 0.0);
}

TEST(ValueIteration, RelayMatchesExpectimax) { expect_matches_expectimax(relay(0.9)); }

TEST(ValueIteration, ToyMatchesExpectimax) { expect_matches_expectimax(toy::model(0.9)); }

TEST(ValueIteration, ToyReachesBothTeams) {
  const ValueTable vt = value_iteration(toy::model(0.9));
  EXPECT_EQ(vt.values.size(), 2u + 4u);
}

TEST(ValueIteration, ShiftingRewardsShiftsValues) {
  const auto m = toy::model(0.9);
  FunctionalOpenModel shifted = m;
  shifted.reward_fn = [m](const TeamState& s, const TeamAction& a) { return m.reward(s, a) + 1.0; };
  const ValueTable a = value_iteration(m, {1e-12});
  const ValueTable b = value_iteration(shifted, {1e-12});
  for (const auto& [s, v] : a.values) EXPECT_NEAR(b.at(s), v + 1.0 / (1.0 - 0.9), 1e-8);
}

TEST(ValueIteration, InvariantToPriorOrder) {
  auto m = toy::model(0.9);
  const ValueTable a = value_iteration(m, {1e-12});
  std::reverse(m.start.begin(), m.start.end());
  const ValueTable b = value_iteration(m, {1e-12});
  ASSERT_EQ(a.values.size(), b.values.size());
  for (const auto& [s, v] : a.values) EXPECT_NEAR(b.at(s), v, 1e-10);
}

TEST(ValueIteration, RejectsUndiscountedModels) {
  EXPECT_ODEC_ERROR(value_iteration(single_state(1.0, 1.0)), ErrorCode::UnsupportedModel);
}
