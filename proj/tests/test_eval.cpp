#include <filesystem>

#include "odec/env/demonstrations.hpp"
#include "odec/harness/eval.hpp"
#include "support.hpp"

using namespace odec;
using namespace odec::harness;

namespace {

EnvSpec spec(const std::string& name, Mode m, int agents) {
  EnvSpec s;
  s.name = name;
  s.mode = m;
  s.agents = agents;
  return s;
}

EvalReport expert_report(const EnvSpec& s, long steps = 10000) {
  auto env = make_environment(s);
  auto expert = make_expert(*env);
  return run_evaluation(*env, [&](const TeamState& st) { return expert->act(st); }, steps,
                        std::numeric_limits<long>::max(), 0);
}

/// A report carrying only the table figures.
EvalReport table(const std::string& env, const std::string& mode, std::vector<double> active, double reward) {
  EvalReport r;
  r.env = env;
  r.mode = mode;
  r.agents = static_cast<int>(active.size());
  r.episodes = 100;
  for (double a : active) r.active.push_back({a, 0.0});
  r.reward = {reward, 0.0};
  return r;
}

}  // namespace

TEST(Eval, ClosedTeamsShareActiveSteps) {
  for (int n : {2, 3}) {
    const EvalReport r = expert_report(spec("uff", Mode::Closed, n));
    ASSERT_EQ(r.active.size(), static_cast<std::size_t>(n));
    for (const auto& a : r.active) EXPECT_EQ(a, r.active[0]);
    EXPECT_EQ(r.active[0].mean, r.length.mean);
  }
  const EvalReport a = expert_report(spec("assembly", Mode::Closed, 2));
  EXPECT_EQ(a.active[0], a.active[1]);
}

TEST(Eval, OpenExpertCallsItsTeammateLate) {
  const EvalReport r = expert_report(spec("uff", Mode::Open, 2));
  EXPECT_LT(r.active[1].mean, r.active[0].mean);
  EXPECT_GT(r.active[1].mean, 0.0);
  const EvalReport a = expert_report(spec("assembly", Mode::Open, 2));
  EXPECT_LT(a.active[1].mean, a.active[0].mean);
}

TEST(Eval, StepBudgetAndEpisodeAccounting) {
  const EvalReport r = expert_report(spec("uff", Mode::Open, 2), 10000);
  EXPECT_EQ(r.steps, 10000);
  EXPECT_EQ(r.episodes, static_cast<long>(r.episode_rewards.size()));
  EXPECT_LE(r.length.mean * double(r.episodes), 10000.0);
  EXPECT_GT(r.length.mean * double(r.episodes + 1), 10000.0);
}

TEST(Eval, ActiveStepsAreBounded) {
  for (const EnvSpec& s : {spec("uff", Mode::Open, 3), spec("uff", Mode::Closed, 3), spec("assembly", Mode::Open, 2)}) {
    const EvalReport r = expert_report(s, 2000);
    double total = 0.0;
    for (const auto& a : r.active) {
      total += a.mean;
      EXPECT_GE(a.std, 0.0);
      EXPECT_LE(a.mean, r.length.mean + 1e-12);
    }
    EXPECT_GE(total, r.length.mean - 1e-12);
    EXPECT_LE(total, double(r.agents) * r.length.mean + 1e-12);
  }
}

TEST(Eval, SummarizeUsesPopulationStd) {
  const Stat s = summarize({1, 2, 3, 4});
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_DOUBLE_EQ(s.std, std::sqrt(1.25));
  EXPECT_EQ(summarize({}), Stat{});
}

TEST(Eval, PolicyEvaluationIsReproducible) {
  auto env = make_environment(spec("uff", Mode::Open, 2));
  const rl::PolicyVector p(*env, rl::NetworkShape{{8}, nn::Activation::Tanh}, 4);
  EXPECT_EQ(evaluate_policies(p, *env, 3000, 2), evaluate_policies(p, *env, 3000, 2));
  EXPECT_EQ(evaluate_policies(p, *env, 3000, 2, true), evaluate_policies(p, *env, 3000, 2, true));
  EXPECT_ODEC_ERROR(evaluate_policies(p, *env, 10), ErrorCode::SchemaError);
}

TEST(Compare, TwoAgentFirefightingTable) {
  const Comparison c = compare_open_closed(table("uff", "open", {18.06, 13.06}, 32.22),
                                           table("uff", "closed", {16.87, 16.87}, 30.37));
  EXPECT_NEAR(c.reward_delta, 1.85, 1e-9);
  EXPECT_NEAR(c.active_delta[1], -3.81, 1e-9);
  EXPECT_TRUE(c.pass);
}

TEST(Compare, ThreeAgentFirefightingTable) {
  const Comparison c = compare_open_closed(table("uff", "open", {12.36, 9.27, 8.27}, 37.86),
                                           table("uff", "closed", {10.33, 10.33, 10.33}, 35.73));
  EXPECT_NEAR(c.reward_delta, 2.13, 1e-9);
  EXPECT_TRUE(c.called_agents_save_steps);
  EXPECT_TRUE(c.pass);
}

TEST(Compare, AssemblyTable) {
  const Comparison c = compare_open_closed(table("assembly", "open", {19.61, 13.20}, 4.06),
                                           table("assembly", "closed", {16.34, 16.34}, 1.74));
  EXPECT_NEAR(-c.active_delta[1], 3.14, 1e-9);
  EXPECT_NEAR(c.reward_delta, 2.32, 1e-9);
  EXPECT_TRUE(c.pass);
}

TEST(Compare, IdenticalReportsFail) {
  const EvalReport r = table("uff", "open", {18.06, 13.06}, 32.22);
  const Comparison c = compare_open_closed(r, r);
  EXPECT_EQ(c.reward_delta, 0.0);
  EXPECT_EQ(c.active_delta, (std::vector<double>{0.0, 0.0}));
  EXPECT_FALSE(c.pass);
}

TEST(Compare, MismatchedReportsAreRejected) {
  EXPECT_ODEC_ERROR(compare_open_closed(table("uff", "open", {1, 1}, 1), table("assembly", "closed", {1, 1}, 1)),
                    ErrorCode::IncompatibleReports);
  EXPECT_ODEC_ERROR(compare_open_closed(table("uff", "open", {1, 1}, 1), table("uff", "closed", {1, 1, 1}, 1)),
                    ErrorCode::IncompatibleReports);
}

TEST(Report, JsonRoundTrip) {
  const EvalReport r = expert_report(spec("uff", Mode::Open, 3), 500);
  EXPECT_EQ(report_from_json(nlohmann::json::parse(to_json(r).dump())), r);
  const auto path = (std::filesystem::temp_directory_path() / "odec_report.json").string();
  save_report(path, r);
  EXPECT_EQ(load_report(path), r);
  std::filesystem::remove(path);
  EXPECT_ODEC_ERROR(report_from_json(nlohmann::json::parse("{\"env\":\"uff\"}")), ErrorCode::SchemaError);
}
