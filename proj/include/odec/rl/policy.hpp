#pragma once

#include <memory>
#include <random>
#include <vector>

#include "odec/env/environment.hpp"
#include "odec/nn/categorical.hpp"
#include "odec/nn/mlp.hpp"

namespace odec::rl {

using nn::Matrix;
using nn::Vector;

/// Turns team states into network inputs.
///
/// actor:  team one-hot ⊕ own local features
/// critic: team one-hot ⊕ per agent slot [active flag ⊕ local features]
/// joint action: per agent slot one-hot over actions (zeros when inactive)
class Featurizer {
 public:
  Featurizer() = default;
  explicit Featurizer(const Environment& env)
      : env_(env.clone()),
        teams_(env.registry().size()),
        agents_(env.agent_count()),
        local_(env.local_feature_size()),
        actions_(env.action_count()) {}

  const Environment& environment() const { return *env_; }
  const TeamRegistry& registry() const { return env_->registry(); }
  int team_count() const noexcept { return teams_; }
  int agent_count() const noexcept { return agents_; }
  int action_count() const noexcept { return actions_; }
  int actor_size() const noexcept { return teams_ + local_; }
  int critic_size() const noexcept { return teams_ + agents_ * (1 + local_); }
  int joint_action_size() const noexcept { return agents_ * actions_; }

  void actor_features(TeamId c, const LocalState& local, std::span<double> out) const {
    std::fill(out.begin(), out.end(), 0.0);
    out[static_cast<std::size_t>(c - 1)] = 1.0;
    env_->encode_local(local, out.subspan(static_cast<std::size_t>(teams_), static_cast<std::size_t>(local_)));
  }
  Vector actor_features(TeamId c, const LocalState& local) const {
    Vector v(actor_size());
    actor_features(c, local, std::span<double>(v.data(), static_cast<std::size_t>(v.size())));
    return v;
  }

  void critic_features(const TeamState& s, std::span<double> out) const {
    std::fill(out.begin(), out.end(), 0.0);
    out[static_cast<std::size_t>(s.team - 1)] = 1.0;
    const auto& members = registry().members(s.team);
    for (std::size_t k = 0; k < members.size(); ++k) {
      const auto base = static_cast<std::size_t>(teams_ + members[k] * (1 + local_));
      out[base] = 1.0;
      env_->encode_local(s.locals[k], out.subspan(base + 1, static_cast<std::size_t>(local_)));
    }
  }
  Vector critic_features(const TeamState& s) const {
    Vector v(critic_size());
    critic_features(s, std::span<double>(v.data(), static_cast<std::size_t>(v.size())));
    return v;
  }

  void joint_action_features(const TeamAction& a, std::span<double> out) const {
    std::fill(out.begin(), out.end(), 0.0);
    const auto& members = registry().members(a.team);
    for (std::size_t k = 0; k < members.size(); ++k)
      out[static_cast<std::size_t>(members[k] * actions_ + a.actions[k])] = 1.0;
  }

 private:
  std::shared_ptr<const Environment> env_;
  int teams_ = 0;
  int agents_ = 0;
  int local_ = 0;
  int actions_ = 0;
};

struct NetworkShape {
  std::vector<int> hidden{64, 64};
  nn::Activation activation = nn::Activation::Tanh;
};

inline std::vector<int> layer_sizes(int in, const NetworkShape& shape, int out) {
  std::vector<int> sizes{in};
  sizes.insert(sizes.end(), shape.hidden.begin(), shape.hidden.end());
  sizes.push_back(out);
  return sizes;
}

struct JointSample {
  TeamAction action;
  std::vector<double> log_probs;  // per active member
};

/// One actor per agent plus a centralized critic. Actors see only the team id
/// and their own local state; the critic sees the whole team state.
class PolicyVector {
 public:
  PolicyVector() = default;
  PolicyVector(const Environment& env, const NetworkShape& shape, std::uint64_t seed)
      : features_(env), mask_(env.action_mask()) {
    for (int i = 0; i < env.agent_count(); ++i)
      actors_.emplace_back(layer_sizes(features_.actor_size(), shape, env.action_count()), shape.activation,
                           mix_seed(seed, static_cast<std::uint64_t>(i)), 0.01);
    critic_ = nn::Mlp(layer_sizes(features_.critic_size(), shape, 1), shape.activation,
                      mix_seed(seed, 1000), 1.0);
  }

  /// Rebuilds a policy vector around existing networks (e.g. from a checkpoint).
  PolicyVector(const Environment& env, std::vector<nn::Mlp> actors, nn::Mlp critic)
      : features_(env), mask_(env.action_mask()), actors_(std::move(actors)), critic_(std::move(critic)) {
    if (static_cast<int>(actors_.size()) != env.agent_count())
      throw Error(ErrorCode::ShapeError, "one actor per agent is required");
    for (const auto& a : actors_)
      if (a.input_size() != features_.actor_size() || a.output_size() != env.action_count())
        throw Error(ErrorCode::ShapeError, "actor shape does not match the environment");
    if (critic_.input_size() != features_.critic_size() || critic_.output_size() != 1)
      throw Error(ErrorCode::ShapeError, "critic shape does not match the environment");
  }

  const Featurizer& features() const noexcept { return features_; }
  int agent_count() const noexcept { return static_cast<int>(actors_.size()); }
  const std::vector<bool>& action_mask() const noexcept { return mask_; }

  nn::Mlp& actor(AgentId i) { return actors_.at(static_cast<std::size_t>(i)); }
  const nn::Mlp& actor(AgentId i) const { return actors_.at(static_cast<std::size_t>(i)); }
  nn::Mlp& critic() { return critic_; }
  const nn::Mlp& critic() const { return critic_; }

  nn::Categorical distribution(AgentId i, TeamId c, const LocalState& local) const {
    return nn::Categorical(actor(i).forward(features_.actor_features(c, local)), mask_);
  }

  /// π_i(a | c, s_i); satisfies the LocalPolicy concept.
  double probability(AgentId i, TeamId c, const LocalState& local, int a) const {
    return distribution(i, c, local).prob(a);
  }

  double value(const TeamState& s) const { return critic_.forward(features_.critic_features(s))[0]; }

  /// Σ over active members of log π_i(a_i | c, s_i).
  double joint_log_prob(const TeamState& s, const TeamAction& a) const {
    const auto& members = features_.registry().members(s.team);
    double lp = 0.0;
    for (std::size_t k = 0; k < members.size(); ++k) lp += distribution(members[k], s.team, s.locals[k]).log_prob(a.actions[k]);
    return lp;
  }

  template <class Rng>
  JointSample act(const TeamState& s, Rng& rng, bool greedy = false) const {
    const auto& members = features_.registry().members(s.team);
    JointSample out{{s.team, std::vector<int>(members.size())}, std::vector<double>(members.size())};
    for (std::size_t k = 0; k < members.size(); ++k) {
      const auto dist = distribution(members[k], s.team, s.locals[k]);
      const int a = greedy ? dist.mode() : dist.sample(rng);
      out.action.actions[k] = a;
      out.log_probs[k] = dist.log_prob(a);
    }
    return out;
  }

  TeamAction greedy(const TeamState& s) const {
    std::mt19937_64 unused(0);
    return act(s, unused, true).action;
  }

 private:
  Featurizer features_;
  std::vector<bool> mask_;
  std::vector<nn::Mlp> actors_;
  nn::Mlp critic_;
};

}  // namespace odec::rl
