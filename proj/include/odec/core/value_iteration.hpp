#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <vector>

#include "odec/core/open_model.hpp"

namespace odec {

struct ValueIterationOptions {
  double tolerance = 1e-8;
  int max_iterations = 100000;
  std::size_t max_states = 2'000'000;
};

struct ValueTable {
  std::map<TeamState, double> values;
  std::map<TeamState, TeamAction> greedy;
  int iterations = 0;
  double residual = 0.0;

  double at(const TeamState& s) const {
    auto it = values.find(s);
    if (it == values.end()) throw Error(ErrorCode::UnknownTeam, "state not in value table");
    return it->second;
  }
};

/// Tabular value iteration over all team states reachable from the prior:
///
///   V(s_c) = max_a R_c(s_c, a) + γ Σ_{c'} Γ(c, a, c') Σ_{s'} P(s' | s_c, a, c') V(s')
///
/// with P = T_c when c' == c and P = T'_c otherwise. Terminal states have
/// value zero. Stops once the sup-norm change of a sweep is below tolerance.
template <EnumerableOpenModel M>
ValueTable value_iteration(const M& model, const ValueIterationOptions& opts = {}) {
  const double gamma = model.discount();
  if (!(gamma >= 0.0 && gamma < 1.0)) throw Error(ErrorCode::UnsupportedModel, "discount must lie in [0, 1)");

  struct Outcome {
    std::size_t next;
    double p;
  };
  struct Choice {
    TeamAction action;
    double reward;
    std::vector<Outcome> outcomes;
  };

  std::vector<TeamState> states;
  std::map<TeamState, std::size_t> index;
  std::vector<std::vector<Choice>> choices;
  std::deque<std::size_t> frontier;

  auto intern = [&](const TeamState& s) {
    auto [it, inserted] = index.emplace(s, states.size());
    if (inserted) {
      if (states.size() >= opts.max_states)
        throw Error(ErrorCode::UnsupportedModel, "reachable state space exceeds enumeration limit");
      states.push_back(s);
      choices.emplace_back();
      frontier.push_back(it->second);
    }
    return it->second;
  };

  for (const auto& [s, p] : model.prior())
    if (p > 0.0) intern(s);

  while (!frontier.empty()) {
    const std::size_t i = frontier.front();
    frontier.pop_front();
    const TeamState s = states[i];
    if (model.is_terminal(s)) continue;
    auto actions = model.joint_actions(s);
    if (actions.empty()) throw Error(ErrorCode::UnsupportedModel, "state without actions");
    std::vector<Choice> local;
    local.reserve(actions.size());
    for (auto& a : actions) {
      Choice ch{a, model.reward(s, a), {}};
      for (const auto& [next_team, pg] : model.team_transition(s.team, a)) {
        if (pg <= 0.0) continue;
        const auto dist = next_team == s.team ? model.intra_transition(s, a) : model.inter_transition(s, next_team);
        for (const auto& [ns, ps] : dist)
          if (ps > 0.0) ch.outcomes.push_back({intern(ns), pg * ps});
      }
      local.push_back(std::move(ch));
    }
    choices[i] = std::move(local);
  }

  std::vector<double> v(states.size(), 0.0), next(states.size(), 0.0);
  std::vector<std::size_t> best(states.size(), 0);
  ValueTable table;
  double residual = std::numeric_limits<double>::infinity();
  int it = 0;
  while (residual >= opts.tolerance && it < opts.max_iterations) {
    residual = 0.0;
    for (std::size_t i = 0; i < states.size(); ++i) {
      if (choices[i].empty()) {
        next[i] = 0.0;
        continue;
      }
      double top = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < choices[i].size(); ++k) {
        const auto& ch = choices[i][k];
        double q = ch.reward;
        for (const auto& o : ch.outcomes) q += gamma * o.p * v[o.next];
        if (q > top) {
          top = q;
          best[i] = k;
        }
      }
      next[i] = top;
      residual = std::max(residual, std::abs(next[i] - v[i]));
    }
    v.swap(next);
    ++it;
  }

  for (std::size_t i = 0; i < states.size(); ++i) {
    table.values.emplace(states[i], v[i]);
    if (!choices[i].empty()) table.greedy.emplace(states[i], choices[i][best[i]].action);
  }
  table.iterations = it;
  table.residual = residual;
  return table;
}

}  // namespace odec
