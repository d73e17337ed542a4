#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <memory>

#include "odec/env/assembly.hpp"
#include "odec/env/uff.hpp"

namespace odec {

/// Rule-based demonstrator acting for the whole current team.
class ScriptedExpert {
 public:
  virtual ~ScriptedExpert() = default;
  virtual TeamAction act(const TeamState& state) = 0;
};

namespace uff {

/// Every active agent works through its own ordered list of fires; no fire is
/// shared. Among assignments with the smallest makespan the planner prefers
/// less total travel, then visiting larger fires earlier.
struct Plan {
  std::vector<std::vector<int>> sequences;  // fire indices per active agent
  int makespan = 0;
};

inline Plan plan_schedule(const TeamState& s) {
  const auto& front = s.locals.front();
  std::vector<int> burning;
  for (int f = 0; f < kFires; ++f)
    if (front[kIntensity0 + f] > 0) burning.push_back(f);
  const int n = static_cast<int>(s.locals.size());

  Plan best;
  best.sequences.assign(static_cast<std::size_t>(n), {});
  if (burning.empty()) return best;
  std::tuple<int, int, std::vector<int>> best_key{std::numeric_limits<int>::max(), 0, {}};

  // Enumerate an owner for each burning fire, then every visiting order.
  std::vector<int> perm = burning;
  std::sort(perm.begin(), perm.end());
  do {
    int assignments = 1;
    for (std::size_t i = 0; i < perm.size(); ++i) assignments *= n;
    for (int code = 0; code < assignments; ++code) {
      std::vector<std::vector<int>> seq(static_cast<std::size_t>(n));
      int c = code;
      for (int f : perm) {
        seq[static_cast<std::size_t>(c % n)].push_back(f);
        c /= n;
      }
      int makespan = 0, travel = 0;
      std::vector<int> order_pref;  // negated intensities in visiting order, flattened per agent
      for (int k = 0; k < n; ++k) {
        int pos = s.locals[static_cast<std::size_t>(k)][kPosition], time = 0;
        for (int f : seq[static_cast<std::size_t>(k)]) {
          const int d = distance(pos, front[kFireCell0 + f]);
          travel += d;
          time += d + front[kIntensity0 + f];
          pos = front[kFireCell0 + f];
          order_pref.push_back(-front[kIntensity0 + f]);
        }
        order_pref.push_back(1);
        makespan = std::max(makespan, time);
      }
      std::tuple<int, int, std::vector<int>> key{makespan, travel, order_pref};
      if (key < best_key) {
        best_key = std::move(key);
        best.sequences = std::move(seq);
        best.makespan = makespan;
      }
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

/// Step toward `target`, rows first.
inline int step_toward(int from, int target) {
  if (target / kGridSide < from / kGridSide) return North;
  if (target / kGridSide > from / kGridSide) return South;
  if (target % kGridSide > from % kGridSide) return East;
  if (target % kGridSide < from % kGridSide) return West;
  return Extinguish;
}

inline TeamAction follow_plan(const TeamState& s) {
  const Plan plan = plan_schedule(s);
  TeamAction a{s.team, std::vector<int>(s.locals.size(), Extinguish)};
  const auto& front = s.locals.front();
  for (std::size_t k = 0; k < s.locals.size(); ++k) {
    if (plan.sequences[k].empty()) continue;
    a.actions[k] = step_toward(s.locals[k][kPosition], front[kFireCell0 + plan.sequences[k].front()]);
  }
  return a;
}

/// Open mode: a member standing on a burning fire calls the next agent when the
/// discounted designed return of calling now beats carrying on with the current team.
class Expert final : public ScriptedExpert {
 public:
  explicit Expert(Config config, double discount = 0.99)
      : config_(config), registry_(make_registry(config)), discount_(discount) {}

  TeamAction act(const TeamState& s) override {
    if (auto it = memo_.find(s); it != memo_.end()) return it->second;
    TeamAction a = follow_plan(s);
    if (config_.mode == Mode::Open && static_cast<int>(s.locals.size()) < config_.max_agents &&
        total_intensity(s.locals.front()) > 0) {
      const auto& front = s.locals.front();
      for (std::size_t k = 0; k < s.locals.size(); ++k) {
        const int f = fire_index_at(front, s.locals[k][kPosition]);
        if (f < 0 || front[kIntensity0 + f] == 0) continue;
        TeamAction call = a;
        call.actions[k] = CallAgent;
        if (rollout_value(s, call) > rollout_value(s, a) + 1e-9) a = call;
        break;
      }
    }
    memo_.emplace(s, a);
    return a;
  }

  const Config& config() const { return config_; }

 private:
  /// Discounted return of taking `first`, then following the plan without further calls.
  double rollout_value(const TeamState& s, const TeamAction& first) const {
    TeamState cur = s;
    TeamAction a = first;
    double value = 0.0, scale = 1.0;
    for (int t = 0; t < config_.horizon; ++t) {
      Outcome o = transition(config_, registry_, cur, a);
      value += scale * o.reward;
      scale *= discount_;
      cur = std::move(o.next);
      if (total_intensity(cur.locals.front()) == 0) break;
      a = follow_plan(cur);
    }
    return value;
  }

  Config config_;
  TeamRegistry registry_;
  double discount_;
  std::map<TeamState, TeamAction> memo_;
};

}  // namespace uff

namespace assembly {

/// The robot places parts itself and brings the human in for each screw.
/// The human only ever drives screws; if it were busy it would reset first.
class Expert final : public ScriptedExpert {
 public:
  explicit Expert(Config config) : config_(config) {}

  TeamAction act(const TeamState& s) override {
    TeamAction a{s.team, std::vector<int>(s.locals.size(), NoOp)};
    const auto& robot = s.locals[0];
    const int task = robot[kTask];
    const bool human = s.locals.size() == 2;
    if (task == Done) return a;
    if (task_finished(robot)) {
      a.actions[0] = ChooseTask;
    } else if (is_place_task(task)) {
      a.actions[0] = robot[kStatus] == Picked ? Place : Pick;
    } else if (is_screw_task(task)) {
      if (!human) {
        a.actions[0] = CallAgent;
      } else if (s.locals[1][kTask] == task) {
        a.actions[0] = HoldInPlace;
      }
    }
    if (human) {
      const auto& h = s.locals[1];
      if (is_screw_task(task) && h[kTask] == task)
        a.actions[1] = ScrewIn;
      else if (is_screw_task(task) && is_place_task(h[kTask]) && !task_finished(h))
        a.actions[1] = ResetTask;
    }
    return a;
  }

 private:
  Config config_;
};

}  // namespace assembly

}  // namespace odec
