#include <random>

#include "odec/core/value_iteration.hpp"
#include "odec/env/uff.hpp"
#include "support.hpp"

using namespace odec;
using namespace odec::uff;

namespace {

TeamAction all(const TeamState& s, int a) { return {s.team, std::vector<int>(s.locals.size(), a)}; }

std::array<int, kFires> intensities(const TeamState& s) {
  const auto& l = s.locals.front();
  return {l[kIntensity0], l[kIntensity0 + 1], l[kIntensity0 + 2]};
}

Config open_config(int agents = 2) {
  Config c;
  c.max_agents = agents;
  return c;
}

}  // namespace

TEST(Uff, OpenResetStartsWithAgentZeroOnly) {
  UrbanFirefighting env(open_config());
  const TeamState s = env.reset(3);
  EXPECT_EQ(env.registry().members(s.team), (std::vector<AgentId>{0}));
  EXPECT_EQ(intensities(s), (std::array<int, 3>{9, 6, 3}));
  EXPECT_EQ(s.locals[0][kPosition], 8);
  EXPECT_EQ(s.locals[0][kTeammatesHere], 0);
}

TEST(Uff, ClosedResetStartsWithFullTeam) {
  Config c = open_config(3);
  c.mode = Mode::Closed;
  UrbanFirefighting env(c);
  const TeamState s = env.reset(0);
  EXPECT_EQ(env.registry().members(s.team), (std::vector<AgentId>{0, 1, 2}));
  EXPECT_EQ(env.registry().size(), 1);
  for (const auto& l : s.locals) EXPECT_EQ(l[kTeammatesHere], 2);
}

TEST(Uff, ResetIsDeterministic) {
  UrbanFirefighting a(open_config()), b(open_config());
  EXPECT_EQ(a.reset(17), b.reset(17));
  a.step(all(a.state(), North));
  EXPECT_EQ(a.reset(17), b.reset(17));
}

TEST(Uff, ExtinguishLowersTheLargeFireByOneTenth) {
  UrbanFirefighting env(open_config());
  TeamState s = env.reset(0);
  for (int a : {North, North, West, West}) s = env.step(all(s, a)).state;
  ASSERT_EQ(s.locals[0][kPosition], 0);
  const StepResult r = env.step(all(s, Extinguish));
  EXPECT_EQ(intensities(r.state), (std::array<int, 3>{8, 6, 3}));
  EXPECT_NEAR(r.reward, 1.0 - 0.1, 1e-12);
}

TEST(Uff, CallAddsAgentOneAtTheSpawnCell) {
  UrbanFirefighting env(open_config());
  TeamState s = env.reset(0);
  s = env.step(all(s, North)).state;
  const StepResult r = env.step(all(s, CallAgent));
  EXPECT_EQ(env.registry().members(r.state.team), (std::vector<AgentId>{0, 1}));
  EXPECT_EQ(r.state.locals[0], s.locals[0]);
  EXPECT_EQ(r.state.locals[1][kPosition], 8);
  EXPECT_NEAR(r.reward, -0.1, 1e-12);
  // The team is full now: another call changes nothing.
  const StepResult again = env.step(TeamAction{r.state.team, {CallAgent, CallAgent}});
  EXPECT_EQ(again.state.team, r.state.team);
}

TEST(Uff, WallBumpOnlyCostsSteps) {
  Config c = open_config();
  c.mode = Mode::Closed;
  UrbanFirefighting env(c);
  const TeamState s = env.reset(0);
  const StepResult r = env.step(all(s, East));
  EXPECT_EQ(r.state, s);
  EXPECT_NEAR(r.reward, -0.2, 1e-12);
}

TEST(Uff, ConcurrentExtinguishOnOneFireIsCapped) {
  Config c = open_config();
  c.mode = Mode::Closed;
  UrbanFirefighting env(c);
  TeamState s = env.reset(0);
  s = env.step(all(s, North)).state;
  s = env.step(all(s, North)).state;
  const StepResult r = env.step(all(s, Extinguish));
  EXPECT_EQ(intensities(r.state), (std::array<int, 3>{9, 5, 3}));
  EXPECT_EQ(r.state.locals[0][kTeammatesHere], 1);
}

TEST(Uff, FinishingPaysTheBonus) {
  Config c = open_config(1);
  c.initial_intensities = {1, 0, 0};
  c.start_cell = 0;
  UrbanFirefighting env(c);
  const StepResult r = env.step(all(env.reset(0), Extinguish));
  EXPECT_TRUE(r.done);
  EXPECT_TRUE(r.terminal);
  EXPECT_NEAR(r.reward, 1.0 - 0.1 + 20.0, 1e-12);
}

TEST(Uff, HorizonEndsTheEpisode) {
  UrbanFirefighting env(open_config());
  TeamState s = env.reset(0);
  StepResult r;
  for (int t = 0; t < 50; ++t) {
    r = env.step(all(s, East));
    s = r.state;
    EXPECT_EQ(r.done, t == 49);
  }
  EXPECT_FALSE(r.terminal);
}

TEST(Uff, RejectsMalformedActions) {
  UrbanFirefighting env(open_config());
  const TeamState s = env.reset(0);
  EXPECT_ODEC_ERROR(env.step(TeamAction{s.team, {0, 0}}), ErrorCode::InvalidAction);
  EXPECT_ODEC_ERROR(env.step(TeamAction{s.team, {6}}), ErrorCode::InvalidAction);
  EXPECT_ODEC_ERROR(env.step(TeamAction{2, {0}}), ErrorCode::InvalidAction);
}

TEST(Uff, RandomPlayInvariants) {
  for (int agents = 1; agents <= 3; ++agents) {
    UrbanFirefighting env(open_config(agents));
    std::mt19937_64 rng(agents);
    std::uniform_int_distribution<int> pick(0, kActionCount - 1);
    for (int ep = 0; ep < 200; ++ep) {
      TeamState s = env.reset(static_cast<std::uint64_t>(ep));
      while (true) {
        TeamAction a{s.team, {}};
        for (std::size_t k = 0; k < s.locals.size(); ++k) a.actions.push_back(pick(rng));
        const StepResult r = env.step(a);
        const auto before = intensities(s), after = intensities(r.state);
        const bool joined = r.state.team != s.team;
        for (int f = 0; f < kFires; ++f) {
          bool targeted = false;
          for (std::size_t k = 0; k < s.locals.size(); ++k)
            targeted = targeted || (a.actions[k] == Extinguish && s.locals[k][kPosition] == s.locals[0][kFireCell0 + f]);
          const int expected = (!joined && targeted && before[f] > 0) ? before[f] - 1 : before[f];
          EXPECT_EQ(after[f], expected);
        }
        EXPECT_GE(r.state.locals.size(), s.locals.size());
        for (const auto& l : r.state.locals) EXPECT_EQ(l[kIntensity0], after[0]);
        s = r.state;
        if (r.done) break;
      }
    }
  }
}

TEST(Uff, RenderIsStable) {
  UrbanFirefighting env(open_config());
  TeamState s = env.reset(0);
  s = env.step(all(s, North)).state;
  env.step(all(s, CallAgent));
  const std::string expected =
      "t=2 team=2 {0,1} reward=-0.10\n"
      "+------+------+------+\n"
      "|F9    |      |F6    |\n"
      "+------+------+------+\n"
      "|      |      |   0  |\n"
      "+------+------+------+\n"
      "|F3    |      |   1  |\n"
      "+------+------+------+\n";
  EXPECT_EQ(env.render(), expected);
}

TEST(UffModel, MatchesTheSimulator) {
  const Config c = open_config();
  const Model m(c);
  UrbanFirefighting env(c);
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> pick(0, kActionCount - 1);
  TeamState s = env.reset(0);
  EXPECT_EQ(probability_of(m.prior(), s), 1.0);
  for (int t = 0; t < 40; ++t) {
    TeamAction a{s.team, {}};
    for (std::size_t k = 0; k < s.locals.size(); ++k) a.actions.push_back(pick(rng));
    const double reward = m.reward(s, a);
    const auto teams = m.team_transition(s.team, a);
    ASSERT_EQ(teams.size(), 1u);
    const TeamId next = teams[0].first;
    const auto dist = next == s.team ? m.intra_transition(s, a) : m.inter_transition(s, next);
    const StepResult r = env.step(a);
    EXPECT_EQ(dist.at(0).first, r.state);
    EXPECT_NEAR(reward, r.reward, 1e-12);
    s = r.state;
    if (r.done) break;
  }
}

TEST(UffModel, ClosedModeHasNoCallActions) {
  Config c = open_config();
  c.mode = Mode::Closed;
  const Model m(c);
  const TeamState s = m.prior().front().first;
  EXPECT_EQ(m.joint_actions(s).size(), 25u);
}

TEST(UffModel, SingleAgentOptimalValueMatchesHandPlan) {
  // Alone, the best plan visits the medium fire first (2 moves), then the large fire (2 moves),
  // then the small fire (2 moves): 6 moves plus 18 extinguish steps.
  Config c = open_config(1);
  const Model m(c, 0.99);
  const ValueTable vt = value_iteration(m);
  const TeamState s0 = m.prior().front().first;
  EXPECT_EQ(vt.greedy.at(s0).actions[0], North);
  // Undiscounted return of that plan under the greedy policy.
  TeamState s = s0;
  double total = 0.0;
  int steps = 0;
  while (!m.is_terminal(s) && steps < 50) {
    const TeamAction a = vt.greedy.at(s);
    total += m.reward(s, a);
    s = m.intra_transition(s, a).front().first;
    ++steps;
  }
  EXPECT_EQ(steps, 24);
  EXPECT_NEAR(total, 18.0 + 20.0 - 0.1 * 24, 1e-9);
}
