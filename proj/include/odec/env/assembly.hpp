#pragma once

#include <algorithm>
#include <array>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>

#include "odec/env/environment.hpp"

namespace odec::assembly {

// Human-robot table assembly. Agent 0 is the robot, agent 1 the human.
// Four parts: two supports and two legs. A leg can only be placed once its
// support is screwed, and screwing needs the human to drive the screw while
// the robot holds the part.

enum Action : int {
  ChooseTask = 0,
  Pick = 1,
  Place = 2,
  HoldInPlace = 3,
  ScrewIn = 4,
  CallAgent = 5,
  ResetTask = 6,
  NoOp = 7,
};
inline constexpr int kActionCount = 8;
inline constexpr std::array<std::string_view, kActionCount> kActionNames = {
    "ChooseTask", "Pick", "Place", "HoldInPlace", "ScrewIn", "CallAgent", "ResetTask", "NoOp"};

enum Task : int {
  Idle = 0,
  PlaceSupport1,
  ScrewSupport1,
  PlaceSupport2,
  ScrewSupport2,
  PlaceLeg1,
  ScrewLeg1,
  PlaceLeg2,
  ScrewLeg2,
  HoldForPartner,
  Done,
};
inline constexpr int kTaskCount = 11;
inline constexpr std::array<std::string_view, kTaskCount> kTaskNames = {
    "Idle",      "PlaceSupport1", "ScrewSupport1", "PlaceSupport2", "ScrewSupport2", "PlaceLeg1",
    "ScrewLeg1", "PlaceLeg2",     "ScrewLeg2",     "HoldForPartner", "Done"};

enum Status : int { NotStarted = 0, Chosen, Picked, Placed, Holding, Screwed, Reset };
inline constexpr int kStatusCount = 7;
inline constexpr std::array<std::string_view, kStatusCount> kStatusNames = {
    "NotStarted", "Chosen", "Picked", "Placed", "Holding", "Screwed", "Reset"};

enum Collab : int { Unavailable = 0, Partial, Full };
inline constexpr int kCollabCount = 3;
inline constexpr std::array<std::string_view, kCollabCount> kCollabNames = {"Unavailable", "Partial", "Full"};

enum Progress : int { Unplaced = 0, PartPlaced, PartScrewed };
inline constexpr int kParts = 4;
inline constexpr std::array<std::string_view, kParts> kPartNames = {"support1", "support2", "leg1", "leg2"};
inline constexpr std::array<std::string_view, 3> kProgressNames = {"Unplaced", "Placed", "Screwed"};

inline constexpr AgentId kRobot = 0;
inline constexpr AgentId kHuman = 1;

enum LocalField : std::size_t { kTask = 0, kStatus = 1, kCollab = 2, kLocalSize = 3 };

constexpr bool is_place_task(int t) { return t >= PlaceSupport1 && t <= ScrewLeg2 && (t - PlaceSupport1) % 2 == 0; }
constexpr bool is_screw_task(int t) { return t >= PlaceSupport1 && t <= ScrewLeg2 && (t - PlaceSupport1) % 2 == 1; }
constexpr int part_of(int t) { return (t - PlaceSupport1) / 2; }
constexpr int place_task(int part) { return PlaceSupport1 + 2 * part; }
constexpr int screw_task(int part) { return ScrewSupport1 + 2 * part; }
/// Support a leg rests on, or -1 for a support.
constexpr int prerequisite(int part) { return part >= 2 ? part - 2 : -1; }

struct Config {
  Mode mode = Mode::Open;
  double step_cost = 0.1;
  double human_cost_multiplier = 2.0;
  double subtask_completion_reward = 1.0;
  double completion_bonus = 10.0;
  int horizon = 60;
};

inline void validate(const Config& c) {
  if (c.horizon < 1) throw Error(ErrorCode::SchemaError, "assembly: horizon must be positive");
  if (c.step_cost < 0 || c.human_cost_multiplier < 0)
    throw Error(ErrorCode::SchemaError, "assembly: costs must be non-negative");
}

inline TeamRegistry make_registry(const Config& c) {
  TeamRegistry reg(2);
  if (c.mode == Mode::Open) reg.register_team({kRobot});
  reg.register_team({kRobot, kHuman});
  return reg;
}

using PartProgress = std::array<int, kParts>;

inline bool all_screwed(const PartProgress& p) {
  return std::all_of(p.begin(), p.end(), [](int x) { return x == PartScrewed; });
}

/// A task is finished when its agent may pick a new one.
inline bool task_finished(const LocalState& l) {
  const int t = l[kTask], st = l[kStatus];
  if (t == Idle || t == HoldForPartner) return true;
  if (is_place_task(t)) return st == Placed || st == Reset;
  if (is_screw_task(t)) return st == Screwed;
  return false;
}

/// Tasks an agent may choose given progress and what the others are doing.
inline std::vector<int> valid_tasks(const PartProgress& progress, AgentId agent, const TeamState& s,
                                    std::size_t self) {
  std::vector<int> out;
  auto claimed = [&](int part) {
    for (std::size_t k = 0; k < s.locals.size(); ++k) {
      if (k == self) continue;
      const auto& l = s.locals[k];
      if (!task_finished(l) && (is_place_task(l[kTask]) || is_screw_task(l[kTask])) && part_of(l[kTask]) == part)
        return true;
    }
    return false;
  };
  for (int p = 0; p < kParts; ++p) {
    if (claimed(p)) continue;
    const int pre = prerequisite(p);
    if (progress[p] == Unplaced && (pre < 0 || progress[pre] == PartScrewed)) out.push_back(place_task(p));
    if (agent == kRobot && progress[p] == PartPlaced) out.push_back(screw_task(p));
  }
  return out;
}

class FurnitureAssembly final : public Environment {
 public:
  explicit FurnitureAssembly(Config config = {}) : config_(config) {
    validate(config_);
    registry_ = make_registry(config_);
    reset(0);
  }

  const Config& config() const noexcept { return config_; }
  const PartProgress& progress() const noexcept { return progress_; }
  bool human_active() const { return state_.locals.size() == 2; }

  std::string_view tag() const override { return "assembly"; }
  Mode mode() const override { return config_.mode; }
  const TeamRegistry& registry() const override { return registry_; }
  int agent_count() const override { return 2; }
  int action_count() const override { return kActionCount; }
  std::string_view action_name(int a) const override { return kActionNames.at(static_cast<std::size_t>(a)); }
  int call_action() const override { return CallAgent; }
  std::size_t local_size() const override { return kLocalSize; }
  int horizon() const override { return config_.horizon; }

  int local_feature_size() const override { return kTaskCount + kStatusCount + kCollabCount; }
  void encode_local(const LocalState& l, std::span<double> out) const override {
    std::fill(out.begin(), out.end(), 0.0);
    out[static_cast<std::size_t>(l[kTask])] = 1.0;
    out[static_cast<std::size_t>(kTaskCount + l[kStatus])] = 1.0;
    out[static_cast<std::size_t>(kTaskCount + kStatusCount + l[kCollab])] = 1.0;
  }

  TeamState reset(std::uint64_t seed) override {
    rng_.seed(seed);
    progress_.fill(Unplaced);
    t_ = 0;
    last_reward_ = 0.0;
    state_ = TeamState{};
    if (config_.mode == Mode::Open) {
      state_.team = registry_.id_of(std::vector<AgentId>{kRobot});
      state_.locals = {{Idle, NotStarted, Unavailable}};
    } else {
      state_.team = registry_.id_of(std::vector<AgentId>{kRobot, kHuman});
      state_.locals = {{Idle, NotStarted, Full}, {HoldForPartner, NotStarted, Full}};
    }
    refresh();
    return state_;
  }

  StepResult step(const TeamAction& action) override {
    check_team_action(*this, state_, action);
    const double cost = config_.step_cost * (1.0 + (human_active() ? config_.human_cost_multiplier : 0.0));
    double reward = -cost;
    bool finished = false;

    const bool calls = config_.mode == Mode::Open && !human_active() && action.actions[0] == CallAgent;
    if (calls) {
      // T'_c: the robot's local carries over; the human enters ready to help.
      state_.team = registry_.id_of(std::vector<AgentId>{kRobot, kHuman});
      const int rt = state_.locals[0][kTask];
      const int ht = is_screw_task(rt) && progress_[part_of(rt)] == PartPlaced ? rt : int(HoldForPartner);
      state_.locals.push_back({ht, NotStarted, Full});
    } else {
      const auto before = progress_;
      apply_actions(action);
      for (int p = 0; p < kParts; ++p)
        if (progress_[p] != before[p]) reward += config_.subtask_completion_reward;
      finished = all_screwed(progress_);
      if (finished) {
        reward += config_.completion_bonus;
        for (auto& l : state_.locals) l[kTask] = Done;
      }
    }
    refresh();
    ++t_;
    last_reward_ = reward;
    return {state_, reward, finished || t_ >= config_.horizon, finished};
  }

  const TeamState& state() const override { return state_; }
  int elapsed() const override { return t_; }

  std::string render() const override {
    std::ostringstream os;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", last_reward_);
    os << "t=" << t_ << " team=" << state_.team << (human_active() ? " {0,1}" : " {0}") << " reward=" << buf << '\n';
    os << "parts:";
    for (int p = 0; p < kParts; ++p) os << ' ' << kPartNames[p] << '=' << kProgressNames[progress_[p]];
    os << '\n';
    for (std::size_t k = 0; k < state_.locals.size(); ++k) {
      const auto& l = state_.locals[k];
      os << (k == 0 ? "robot " : "human ") << " task=" << kTaskNames[l[kTask]] << " status=" << kStatusNames[l[kStatus]]
         << " collab=" << kCollabNames[l[kCollab]] << '\n';
    }
    return os.str();
  }

  std::unique_ptr<Environment> clone() const override { return std::make_unique<FurnitureAssembly>(*this); }

 private:
  void apply_actions(const TeamAction& action) {
    const int robot_act = action.actions[0];
    const int human_act = human_active() ? action.actions[1] : NoOp;
    const TeamState snapshot = state_;

    for (std::size_t k = 0; k < state_.locals.size(); ++k) {
      auto& l = state_.locals[k];
      const AgentId agent = static_cast<AgentId>(k);
      const int act = action.actions[k];
      const int task = l[kTask];
      switch (act) {
        case ChooseTask: {
          if (!task_finished(l) || task == Done) break;
          const auto options = valid_tasks(progress_, agent, snapshot, k);
          if (options.empty()) break;
          std::uniform_int_distribution<std::size_t> pick(0, options.size() - 1);
          l[kTask] = options[pick(rng_)];
          l[kStatus] = Chosen;
          break;
        }
        case Pick:
          if (is_place_task(task) && (l[kStatus] == Chosen || l[kStatus] == Reset) &&
              progress_[part_of(task)] == Unplaced)
            l[kStatus] = Picked;
          break;
        case Place:
          if (is_place_task(task) && l[kStatus] == Picked) {
            progress_[part_of(task)] = PartPlaced;
            l[kStatus] = Placed;
          }
          break;
        case HoldInPlace:
          if (agent == kRobot && is_screw_task(task) && progress_[part_of(task)] == PartPlaced) l[kStatus] = Holding;
          break;
        case ResetTask:
          // Puts a picked part back and frees the agent.
          if (is_place_task(task) && (l[kStatus] == Chosen || l[kStatus] == Picked)) l[kStatus] = Reset;
          break;
        default:
          break;
      }
    }

    if (human_active() && human_act == ScrewIn && robot_act == HoldInPlace) {
      const int rt = snapshot.locals[0][kTask];
      const int ht = snapshot.locals[1][kTask];
      if (is_screw_task(rt) && ht == rt && progress_[part_of(rt)] == PartPlaced) {
        progress_[part_of(rt)] = PartScrewed;
        state_.locals[0][kStatus] = Screwed;
        state_.locals[1][kStatus] = Screwed;
      }
    }
  }

  void refresh() {
    if (!human_active()) {
      state_.locals[0][kCollab] = Unavailable;
      return;
    }
    auto& robot = state_.locals[0];
    auto& human = state_.locals[1];
    const int rt = robot[kTask];
    // A free human is assigned the robot's pending screw task.
    if (is_screw_task(rt) && progress_[part_of(rt)] == PartPlaced && task_finished(human) && human[kTask] != rt) {
      human[kTask] = rt;
      human[kStatus] = NotStarted;
    }
    const bool busy = is_place_task(human[kTask]) && !task_finished(human);
    robot[kCollab] = human[kCollab] = busy ? Partial : Full;
  }

  Config config_;
  TeamRegistry registry_;
  TeamState state_;
  PartProgress progress_{};
  std::mt19937_64 rng_;
  int t_ = 0;
  double last_reward_ = 0.0;
};

}  // namespace odec::assembly
