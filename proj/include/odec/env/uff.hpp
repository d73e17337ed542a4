#pragma once

#include <algorithm>
#include <array>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <string>

#include "odec/core/open_model.hpp"
#include "odec/env/environment.hpp"

namespace odec::uff {

// Urban Firefighting on a 3×3 grid. Cells are numbered row-major:
//
//   0 1 2
//   3 4 5
//   6 7 8
//
// Intensities are stored in tenths (0..10) so a local state stays integral.

enum Action : int { North = 0, South = 1, East = 2, West = 3, CallAgent = 4, Extinguish = 5 };
inline constexpr int kActionCount = 6;
inline constexpr std::array<std::string_view, kActionCount> kActionNames = {"North",     "South",     "East",
                                                                             "West",      "CallAgent", "Extinguish"};
inline constexpr int kGridSide = 3;
inline constexpr int kCells = kGridSide * kGridSide;
inline constexpr int kFires = 3;

// Layout of a local state vector.
enum LocalField : std::size_t {
  kPosition = 0,
  kFireCell0 = 1,
  kIntensity0 = 4,
  kTeammatesHere = 7,
  kLocalSize = 8,
};

struct Config {
  int max_agents = 2;
  Mode mode = Mode::Open;
  /// Large, medium and small fire, in tenths.
  std::array<int, kFires> initial_intensities{9, 6, 3};
  std::array<int, kFires> fire_cells{0, 2, 6};
  int start_cell = 8;
  /// Cell where called agents appear; closed-mode teammates also start here.
  int spawn_cell = 8;
  /// Intensity removed by one effective Extinguish, in tenths.
  int extinguish_delta = 1;
  /// When false a fire loses at most one delta per step however many agents extinguish it.
  bool extinguish_stacks = false;
  double step_cost_per_active_agent = 0.1;
  double extinguish_reward_per_delta = 1.0;
  double completion_bonus = 20.0;
  int horizon = 50;
};

inline void validate(const Config& c) {
  if (c.max_agents < 1 || c.max_agents > 3) throw Error(ErrorCode::SchemaError, "uff: max_agents must be 1..3");
  for (int i = 0; i < kFires; ++i) {
    if (c.fire_cells[i] < 0 || c.fire_cells[i] >= kCells) throw Error(ErrorCode::SchemaError, "uff: bad fire cell");
    if (c.initial_intensities[i] < 0 || c.initial_intensities[i] > 10)
      throw Error(ErrorCode::SchemaError, "uff: intensities must be within 0..1");
  }
  if (c.start_cell < 0 || c.start_cell >= kCells || c.spawn_cell < 0 || c.spawn_cell >= kCells)
    throw Error(ErrorCode::SchemaError, "uff: bad start or spawn cell");
  if (c.extinguish_delta < 1) throw Error(ErrorCode::SchemaError, "uff: extinguish_delta must be positive");
  if (c.horizon < 1) throw Error(ErrorCode::SchemaError, "uff: horizon must be positive");
}

constexpr int move_cell(int cell, int action) {
  int r = cell / kGridSide, c = cell % kGridSide;
  switch (action) {
    case North: r = std::max(0, r - 1); break;
    case South: r = std::min(kGridSide - 1, r + 1); break;
    case East: c = std::min(kGridSide - 1, c + 1); break;
    case West: c = std::max(0, c - 1); break;
    default: break;
  }
  return r * kGridSide + c;
}

constexpr int distance(int a, int b) {
  const int dr = a / kGridSide - b / kGridSide, dc = a % kGridSide - b % kGridSide;
  return (dr < 0 ? -dr : dr) + (dc < 0 ? -dc : dc);
}

/// Team registry for the domain: the chain {0} ⊂ {0,1} ⊂ … in open mode,
/// only the full team in closed mode.
inline TeamRegistry make_registry(const Config& c) {
  TeamRegistry reg(c.max_agents);
  std::vector<AgentId> team;
  for (int n = 1; n <= c.max_agents; ++n) {
    team.push_back(n - 1);
    if (c.mode == Mode::Open || n == c.max_agents) reg.register_team(team);
  }
  return reg;
}

inline int total_intensity(const LocalState& l) {
  return l[kIntensity0] + l[kIntensity0 + 1] + l[kIntensity0 + 2];
}

inline int fire_index_at(const LocalState& l, int cell) {
  for (int f = 0; f < kFires; ++f)
    if (l[kFireCell0 + f] == cell) return f;
  return -1;
}

inline void refresh_teammate_counts(TeamState& s) {
  for (auto& l : s.locals) {
    int n = 0;
    for (const auto& o : s.locals) n += (o[kPosition] == l[kPosition]);
    l[kTeammatesHere] = n - 1;
  }
}

inline LocalState make_local(const Config& c, int cell, const std::array<int, kFires>& intensities) {
  LocalState l(kLocalSize, 0);
  l[kPosition] = cell;
  for (int f = 0; f < kFires; ++f) {
    l[kFireCell0 + f] = c.fire_cells[f];
    l[kIntensity0 + f] = intensities[f];
  }
  return l;
}

inline TeamState initial_state(const Config& c, const TeamRegistry& reg) {
  TeamState s;
  const int n = c.mode == Mode::Open ? 1 : c.max_agents;
  std::vector<AgentId> team(static_cast<std::size_t>(n));
  std::iota(team.begin(), team.end(), 0);
  s.team = reg.id_of(team);
  for (int i = 0; i < n; ++i) s.locals.push_back(make_local(c, i == 0 ? c.start_cell : c.spawn_cell, c.initial_intensities));
  refresh_teammate_counts(s);
  return s;
}

/// Γ: a CallAgent by any member adds the lowest-index inactive agent.
inline TeamId next_team(const Config& c, const TeamRegistry& reg, const TeamState& s, const TeamAction& a) {
  if (c.mode == Mode::Closed) return s.team;
  const auto& members = reg.members(s.team);
  if (static_cast<int>(members.size()) >= c.max_agents) return s.team;
  if (std::find(a.actions.begin(), a.actions.end(), CallAgent) == a.actions.end()) return s.team;
  std::vector<AgentId> grown = members;
  grown.push_back(static_cast<AgentId>(members.size()));
  return reg.id_of(grown);
}

/// T'_c: members keep their locals, the joiner appears at the spawn cell.
inline TeamState join_state(const Config& c, const TeamRegistry& reg, const TeamState& s, TeamId next) {
  TeamState out{next, s.locals};
  const auto& front = s.locals.front();
  std::array<int, kFires> intensities{front[kIntensity0], front[kIntensity0 + 1], front[kIntensity0 + 2]};
  for (int k = static_cast<int>(s.locals.size()); k < reg.cardinality(next); ++k)
    out.locals.push_back(make_local(c, c.spawn_cell, intensities));
  refresh_teammate_counts(out);
  return out;
}

struct Outcome {
  TeamState next;
  double reward = 0.0;
  bool all_out = false;
};

/// T_c: moves clamp at the grid edge; Extinguish on a burning cell removes one delta.
inline Outcome intra_outcome(const Config& c, const TeamState& s, const TeamAction& a) {
  Outcome out{s, 0.0, false};
  const auto& front = s.locals.front();
  std::array<int, kFires> intensity{front[kIntensity0], front[kIntensity0 + 1], front[kIntensity0 + 2]};
  std::array<bool, kFires> hit{false, false, false};
  int reduced = 0;
  for (std::size_t k = 0; k < s.locals.size(); ++k) {
    const int act = a.actions[k];
    const int pos = s.locals[k][kPosition];
    if (act <= West) {
      out.next.locals[k][kPosition] = move_cell(pos, act);
    } else if (act == Extinguish) {
      const int f = fire_index_at(s.locals[k], pos);
      if (f < 0 || intensity[f] == 0 || (hit[f] && !c.extinguish_stacks)) continue;
      const int d = std::min(c.extinguish_delta, intensity[f]);
      intensity[f] -= d;
      reduced += d;
      hit[f] = true;
    }
  }
  for (auto& l : out.next.locals)
    for (int f = 0; f < kFires; ++f) l[kIntensity0 + f] = intensity[f];
  refresh_teammate_counts(out.next);
  const int before = total_intensity(front);
  out.all_out = before > 0 && total_intensity(out.next.locals.front()) == 0;
  out.reward = c.extinguish_reward_per_delta * (double(reduced) / c.extinguish_delta) -
               c.step_cost_per_active_agent * static_cast<double>(s.locals.size()) +
               (out.all_out ? c.completion_bonus : 0.0);
  return out;
}

/// Full deterministic transition: Γ, then T_c or T'_c.
inline Outcome transition(const Config& c, const TeamRegistry& reg, const TeamState& s, const TeamAction& a) {
  const TeamId nt = next_team(c, reg, s, a);
  if (nt != s.team) {
    return {join_state(c, reg, s, nt), -c.step_cost_per_active_agent * static_cast<double>(s.locals.size()), false};
  }
  return intra_outcome(c, s, a);
}

class UrbanFirefighting final : public Environment {
 public:
  explicit UrbanFirefighting(Config config = {}) : config_(config) {
    validate(config_);
    registry_ = make_registry(config_);
    state_ = initial_state(config_, registry_);
  }

  const Config& config() const noexcept { return config_; }

  std::string_view tag() const override { return "uff"; }
  Mode mode() const override { return config_.mode; }
  const TeamRegistry& registry() const override { return registry_; }
  int agent_count() const override { return config_.max_agents; }
  int action_count() const override { return kActionCount; }
  std::string_view action_name(int a) const override { return kActionNames.at(static_cast<std::size_t>(a)); }
  int call_action() const override { return CallAgent; }
  std::size_t local_size() const override { return kLocalSize; }
  int horizon() const override { return config_.horizon; }

  // one-hot position, intensities in [0,1], teammates at my cell normalized by N−1
  int local_feature_size() const override { return kCells + kFires + 1; }
  void encode_local(const LocalState& l, std::span<double> out) const override {
    std::fill(out.begin(), out.end(), 0.0);
    out[static_cast<std::size_t>(l[kPosition])] = 1.0;
    for (int f = 0; f < kFires; ++f) out[kCells + f] = l[kIntensity0 + f] / 10.0;
    out[kCells + kFires] = config_.max_agents > 1 ? l[kTeammatesHere] / double(config_.max_agents - 1) : 0.0;
  }

  TeamState reset(std::uint64_t /*seed*/) override {
    state_ = initial_state(config_, registry_);
    t_ = 0;
    last_reward_ = 0.0;
    return state_;
  }

  StepResult step(const TeamAction& action) override {
    check_team_action(*this, state_, action);
    Outcome o = transition(config_, registry_, state_, action);
    state_ = std::move(o.next);
    ++t_;
    last_reward_ = o.reward;
    const bool terminal = total_intensity(state_.locals.front()) == 0;
    return {state_, o.reward, terminal || t_ >= config_.horizon, terminal};
  }

  const TeamState& state() const override { return state_; }
  int elapsed() const override { return t_; }

  std::string render() const override { return render_frame(config_, registry_, state_, t_, last_reward_); }

  static std::string render_frame(const Config& c, const TeamRegistry& reg, const TeamState& s, int t,
                                  double reward) {
    std::ostringstream os;
    const auto& members = reg.members(s.team);
    os << "t=" << t << " team=" << s.team << " {";
    for (std::size_t k = 0; k < members.size(); ++k) os << (k ? "," : "") << members[k];
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", reward);
    os << "} reward=" << buf << '\n';
    const auto& front = s.locals.front();
    const std::string border = "+------+------+------+\n";
    os << border;
    for (int r = 0; r < kGridSide; ++r) {
      os << '|';
      for (int col = 0; col < kGridSide; ++col) {
        const int cell = r * kGridSide + col;
        std::string text;
        const int f = fire_index_at(front, cell);
        text += f >= 0 ? "F" + std::to_string(front[kIntensity0 + f]) : std::string("  ");
        text += ' ';
        for (std::size_t k = 0; k < members.size(); ++k)
          if (s.locals[k][kPosition] == cell) text += std::to_string(members[k]);
        text.resize(6, ' ');
        os << text << '|';
      }
      os << '\n' << border;
    }
    (void)c;
    return os.str();
  }

  std::unique_ptr<Environment> clone() const override { return std::make_unique<UrbanFirefighting>(*this); }

 private:
  Config config_;
  TeamRegistry registry_;
  TeamState state_;
  int t_ = 0;
  double last_reward_ = 0.0;
};

/// The domain as an enumerable open decision model (deterministic Γ, T_c, T'_c).
class Model {
 public:
  explicit Model(Config config, double discount = 0.99)
      : config_(config), registry_(make_registry(config)), discount_(discount) {
    validate(config_);
  }

  const TeamRegistry& registry() const { return registry_; }
  Distribution<TeamId> team_transition(TeamId c, const TeamAction& a) const {
    TeamState probe{c, std::vector<LocalState>(static_cast<std::size_t>(registry_.cardinality(c)))};
    return {{next_team(config_, registry_, probe, a), 1.0}};
  }
  Distribution<TeamState> intra_transition(const TeamState& s, const TeamAction& a) const {
    return {{intra_outcome(config_, s, a).next, 1.0}};
  }
  Distribution<TeamState> inter_transition(const TeamState& s, TeamId next) const {
    return {{join_state(config_, registry_, s, next), 1.0}};
  }
  double reward(const TeamState& s, const TeamAction& a) const { return transition(config_, registry_, s, a).reward; }
  Distribution<TeamState> prior() const { return {{initial_state(config_, registry_), 1.0}}; }
  double discount() const { return discount_; }
  std::vector<TeamAction> joint_actions(const TeamState& s) const {
    std::vector<TeamAction> all = product_actions(s.team, std::vector<int>(s.locals.size(), kActionCount));
    if (config_.mode == Mode::Closed)
      std::erase_if(all, [](const TeamAction& a) {
        return std::find(a.actions.begin(), a.actions.end(), CallAgent) != a.actions.end();
      });
    return all;
  }
  bool is_terminal(const TeamState& s) const { return total_intensity(s.locals.front()) == 0; }

 private:
  Config config_;
  TeamRegistry registry_;
  double discount_;
};

}  // namespace odec::uff
