#include <random>

#include "odec/env/assembly.hpp"
#include "support.hpp"

using namespace odec;
using namespace odec::assembly;

namespace {

Config mode(Mode m) {
  Config c;
  c.mode = m;
  return c;
}

TeamAction act(const TeamState& s, int robot, int human = NoOp) {
  TeamAction a{s.team, {robot}};
  if (s.locals.size() == 2) a.actions.push_back(human);
  return a;
}

/// Robot places whichever support it draws; returns that part.
int place_first_support(FurnitureAssembly& env, double& reward) {
  TeamState s = env.state();
  s = env.step(act(s, ChooseTask)).state;
  const int task = s.locals[0][kTask];
  EXPECT_TRUE(task == PlaceSupport1 || task == PlaceSupport2);
  EXPECT_EQ(s.locals[0][kStatus], Chosen);
  s = env.step(act(s, Pick)).state;
  EXPECT_EQ(s.locals[0][kStatus], Picked);
  const StepResult r = env.step(act(s, Place));
  EXPECT_EQ(r.state.locals[0][kStatus], Placed);
  reward = r.reward;
  return part_of(task);
}

}  // namespace

TEST(Assembly, OpenResetHasOnlyTheRobot) {
  FurnitureAssembly env(mode(Mode::Open));
  const TeamState s = env.reset(0);
  EXPECT_EQ(env.registry().members(s.team), (std::vector<AgentId>{kRobot}));
  EXPECT_EQ(s.locals[0], (LocalState{Idle, NotStarted, Unavailable}));
}

TEST(Assembly, ClosedResetHasBothAgents) {
  FurnitureAssembly env(mode(Mode::Closed));
  const TeamState s = env.reset(0);
  EXPECT_EQ(env.registry().members(s.team), (std::vector<AgentId>{kRobot, kHuman}));
  EXPECT_EQ(env.registry().size(), 1);
}

TEST(Assembly, SameSeedSameEpisode) {
  FurnitureAssembly a(mode(Mode::Closed)), b(mode(Mode::Closed));
  a.reset(9);
  b.reset(9);
  std::mt19937 rng(1);
  for (int t = 0; t < 60; ++t) {
    const TeamAction x = act(a.state(), static_cast<int>(rng() % 8), static_cast<int>(rng() % 8));
    const StepResult ra = a.step(x), rb = b.step(x);
    EXPECT_EQ(ra.state, rb.state);
    EXPECT_EQ(ra.reward, rb.reward);
    if (ra.done) break;
  }
}

TEST(Assembly, PlacingAPartPaysTheSubtaskReward) {
  FurnitureAssembly env(mode(Mode::Open));
  env.reset(0);
  double reward = 0.0;
  const int part = place_first_support(env, reward);
  EXPECT_EQ(env.progress()[static_cast<std::size_t>(part)], PartPlaced);
  EXPECT_NEAR(reward, 1.0 - 0.1, 1e-12);
}

TEST(Assembly, HandTracedScrewing) {
  bool traced = false;
  for (std::uint64_t seed = 0; seed < 64 && !traced; ++seed) {
    FurnitureAssembly env(mode(Mode::Closed));
    env.reset(seed);
    double reward = 0.0;
    const int part = place_first_support(env, reward);
    EXPECT_NEAR(reward, 1.0 - 0.1 * 3, 1e-12);  // both agents present, the human costs double
    TeamState s = env.step(act(env.state(), ChooseTask)).state;
    if (s.locals[0][kTask] != screw_task(part)) continue;  // drew the other support instead
    traced = true;
    // The idle human is assigned the same screw task.
    EXPECT_EQ(s.locals[1][kTask], screw_task(part));
    StepResult r = env.step(act(s, Pick, ScrewIn));
    EXPECT_EQ(env.progress()[static_cast<std::size_t>(part)], PartPlaced);
    EXPECT_NEAR(r.reward, -0.3, 1e-12);
    r = env.step(act(r.state, HoldInPlace, ScrewIn));
    EXPECT_EQ(env.progress()[static_cast<std::size_t>(part)], PartScrewed);
    EXPECT_EQ(r.state.locals[0][kStatus], Screwed);
    EXPECT_EQ(r.state.locals[1][kStatus], Screwed);
    EXPECT_NEAR(r.reward, 1.0 - 0.3, 1e-12);
  }
  EXPECT_TRUE(traced);
}

TEST(Assembly, ScrewingNeedsAHolder) {
  for (std::uint64_t seed = 0; seed < 64; ++seed) {
    FurnitureAssembly env(mode(Mode::Closed));
    env.reset(seed);
    double reward = 0.0;
    const int part = place_first_support(env, reward);
    TeamState s = env.step(act(env.state(), ChooseTask)).state;
    if (s.locals[0][kTask] != screw_task(part)) continue;
    for (int robot : {ChooseTask, Pick, Place, ScrewIn, ResetTask, NoOp}) {
      env.step(act(env.state(), robot, ScrewIn));
      EXPECT_EQ(env.progress()[static_cast<std::size_t>(part)], PartPlaced);
    }
    return;
  }
  FAIL() << "no seed drew a screw task";
}

TEST(Assembly, CallBringsTheHumanInForThePendingScrew) {
  for (std::uint64_t seed = 0; seed < 64; ++seed) {
    FurnitureAssembly env(mode(Mode::Open));
    env.reset(seed);
    double reward = 0.0;
    const int part = place_first_support(env, reward);
    TeamState s = env.step(act(env.state(), ChooseTask)).state;
    if (s.locals[0][kTask] != screw_task(part)) continue;
    const StepResult r = env.step(act(s, CallAgent));
    ASSERT_TRUE(env.human_active());
    EXPECT_EQ(r.state.locals[0], (LocalState{screw_task(part), Chosen, Full}));
    EXPECT_EQ(r.state.locals[1], (LocalState{screw_task(part), NotStarted, Full}));
    EXPECT_NEAR(r.reward, -0.1, 1e-12);
    return;
  }
  FAIL() << "no seed drew a screw task";
}

TEST(Assembly, LegsNeedTheirSupportScrewed) {
  FurnitureAssembly env(mode(Mode::Closed));
  env.reset(0);
  const auto options = valid_tasks(env.progress(), kRobot, env.state(), 0);
  for (int t : options) EXPECT_TRUE(t == PlaceSupport1 || t == PlaceSupport2) << kTaskNames[t];
  PartProgress p{};
  p[0] = PartScrewed;
  p[1] = PartPlaced;
  const auto later = valid_tasks(p, kRobot, env.state(), 0);
  EXPECT_NE(std::find(later.begin(), later.end(), PlaceLeg1), later.end());
  EXPECT_EQ(std::find(later.begin(), later.end(), PlaceLeg2), later.end());
  EXPECT_NE(std::find(later.begin(), later.end(), ScrewSupport2), later.end());
}

TEST(Assembly, RandomPlayRespectsPrecedenceAndConcurrency) {
  for (Mode m : {Mode::Open, Mode::Closed}) {
    FurnitureAssembly env(mode(m));
    std::mt19937_64 rng(static_cast<std::uint64_t>(m == Mode::Open));
    std::uniform_int_distribution<int> pick(0, kActionCount - 1);
    for (int ep = 0; ep < 300; ++ep) {
      TeamState s = env.reset(static_cast<std::uint64_t>(ep));
      bool joined = env.human_active();
      while (true) {
        // Bias toward useful actions so that later stages are reached.
        TeamAction a = act(s, pick(rng), rng() % 2 ? ScrewIn : pick(rng));
        if (rng() % 3 == 0) a.actions[0] = HoldInPlace;
        const PartProgress before = env.progress();
        const StepResult r = env.step(a);
        const PartProgress after = env.progress();
        EXPECT_LE(before.size(), after.size());
        for (int p = 0; p < kParts; ++p) {
          EXPECT_GE(after[p], before[p]);
          EXPECT_LE(after[p] - before[p], 1);
          if (after[p] == PartScrewed && before[p] != PartScrewed) {
            ASSERT_EQ(a.actions.size(), 2u);
            EXPECT_EQ(a.actions[0], HoldInPlace);
            EXPECT_EQ(a.actions[1], ScrewIn);
            EXPECT_EQ(before[p], PartPlaced);
          }
          if (p >= 2 && after[p] != Unplaced) {
            EXPECT_EQ(after[prerequisite(p)], PartScrewed);
          }
        }
        if (joined) {
          EXPECT_TRUE(env.human_active());
        }
        joined = env.human_active();
        s = r.state;
        if (r.done) break;
      }
    }
  }
}

TEST(Assembly, RenderIsStable) {
  FurnitureAssembly env(mode(Mode::Open));
  env.reset(0);
  EXPECT_EQ(env.render(),
            "t=0 team=1 {0} reward=0.00\n"
            "parts: support1=Unplaced support2=Unplaced leg1=Unplaced leg2=Unplaced\n"
            "robot  task=Idle status=NotStarted collab=Unavailable\n");
}
