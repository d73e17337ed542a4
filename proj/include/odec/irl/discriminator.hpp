#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "odec/core/validate.hpp"
#include "odec/nn/adam.hpp"
#include "odec/nn/gradient_check.hpp"
#include "odec/rl/policy.hpp"

namespace odec::irl {

using nn::Matrix;
using nn::Vector;

inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// log(1 + e^x) without overflow.
inline double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

inline void check_finite(double f, double log_pi) {
  if (!std::isfinite(f) || !std::isfinite(log_pi))
    throw Error(ErrorCode::NonFiniteInput, "discriminator input is not finite");
}

/// D = e^f / (e^f + π) = σ(f − log π).
inline double discriminator_output(double f, double log_pi) {
  check_finite(f, log_pi);
  return sigmoid(f - log_pi);
}

/// log D − log(1 − D) in closed form.
inline double extract_reward(double f, double log_pi) {
  check_finite(f, log_pi);
  return f - log_pi;
}

/// The same quantity computed literally from D, for cross-checking the closed form.
/// Uses log σ(x) = −softplus(−x) and log(1 − σ(x)) = −softplus(x).
inline double reward_from_logodds_terms(double f, double log_pi) {
  check_finite(f, log_pi);
  const double x = f - log_pi;
  const double log_d = -softplus(-x);
  const double log_one_minus_d = -softplus(x);
  return log_d - log_one_minus_d;
}

struct Sample {
  TeamState state;
  TeamAction action;
};

using LogPiFn = std::function<double(const TeamState&, const TeamAction&)>;

/// f_θ(c, s, a) over team one-hot ⊕ team state ⊕ joint action one-hot.
class DiscriminatorModel {
 public:
  DiscriminatorModel() = default;
  DiscriminatorModel(const Environment& env, const rl::NetworkShape& shape, std::uint64_t seed, double lr = 1e-3)
      : features_(env),
        net_(rl::layer_sizes(features_.critic_size() + features_.joint_action_size(), shape, 1), shape.activation,
             seed, 1.0),
        opt_(net_.parameter_count(), lr) {}

  DiscriminatorModel(const Environment& env, nn::Mlp net, double lr = 1e-3)
      : features_(env), net_(std::move(net)), opt_(net_.parameter_count(), lr) {
    if (net_.input_size() != features_.critic_size() + features_.joint_action_size() || net_.output_size() != 1)
      throw Error(ErrorCode::ShapeError, "discriminator shape does not match the environment");
  }

  const rl::Featurizer& features() const noexcept { return features_; }
  const nn::Mlp& net() const noexcept { return net_; }
  nn::Mlp& net() noexcept { return net_; }
  nn::AdamState& optimizer() noexcept { return opt_; }
  int input_size() const noexcept { return net_.input_size(); }

  void encode(const TeamState& s, const TeamAction& a, std::span<double> out) const {
    const auto cs = static_cast<std::size_t>(features_.critic_size());
    features_.critic_features(s, out.first(cs));
    features_.joint_action_features(a, out.subspan(cs));
  }

  Matrix inputs(const std::vector<const Sample*>& batch) const {
    Matrix x(input_size(), static_cast<Eigen::Index>(batch.size()));
    for (std::size_t j = 0; j < batch.size(); ++j)
      encode(batch[j]->state, batch[j]->action,
             std::span<double>(x.col(static_cast<Eigen::Index>(j)).data(), static_cast<std::size_t>(x.rows())));
    return x;
  }

  double f(const TeamState& s, const TeamAction& a) const {
    Vector x(input_size());
    encode(s, a, std::span<double>(x.data(), static_cast<std::size_t>(x.size())));
    return net_.forward(x)[0];
  }

 private:
  rl::Featurizer features_;
  nn::Mlp net_;
  nn::AdamState opt_;
};

struct DiscriminatorLoss {
  double loss = 0.0;
  double accuracy = 0.0;  // expert D > ½ and generator D < ½
  Vector gradient;
};

/// Mean binary cross-entropy (expert → 1, generator → 0) and its parameter gradient.
/// ∂/∂x of the per-sample loss with x = f − log π is σ(x) − 1 for expert samples and σ(x) for generator samples.
inline DiscriminatorLoss discriminator_loss(const DiscriminatorModel& model, const std::vector<const Sample*>& expert,
                                            const std::vector<const Sample*>& generator, const LogPiFn& log_pi) {
  if (expert.empty() || generator.empty()) throw Error(ErrorCode::EmptyBatch, "discriminator batches must be non-empty");
  std::vector<const Sample*> all = expert;
  all.insert(all.end(), generator.begin(), generator.end());
  nn::ForwardCache cache;
  const Matrix f = model.net().forward(model.inputs(all), &cache);
  const auto n = static_cast<Eigen::Index>(all.size());
  Matrix upstream(1, n);
  DiscriminatorLoss out;
  long correct = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const bool is_expert = j < static_cast<Eigen::Index>(expert.size());
    const double lp = log_pi(all[static_cast<std::size_t>(j)]->state, all[static_cast<std::size_t>(j)]->action);
    check_finite(f(0, j), lp);
    const double x = f(0, j) - lp;
    out.loss += is_expert ? softplus(-x) : softplus(x);
    upstream(0, j) = (is_expert ? sigmoid(x) - 1.0 : sigmoid(x)) / double(n);
    correct += is_expert ? (x > 0.0) : (x < 0.0);
  }
  out.loss /= double(n);
  out.accuracy = double(correct) / double(n);
  out.gradient = model.net().backward(cache, upstream);
  return out;
}

/// Worst relative error between the BCE gradient and central differences of the loss.
inline double bce_gradient_error(const DiscriminatorModel& model, const std::vector<const Sample*>& expert,
                                 const std::vector<const Sample*>& generator, const LogPiFn& log_pi, double h = 1e-5) {
  const Vector analytic = discriminator_loss(model, expert, generator, log_pi).gradient;
  DiscriminatorModel scratch = model;
  auto loss = [&](const Vector& p) {
    scratch.net().set_parameters(p);
    return discriminator_loss(scratch, expert, generator, log_pi).loss;
  };
  return nn::max_relative_gradient_error(model.net().parameters(), loss, analytic, h);
}

/// One Adam step on the BCE loss; returns the loss and accuracy before the step.
inline DiscriminatorLoss discriminator_update(DiscriminatorModel& model, const std::vector<const Sample*>& expert,
                                              const std::vector<const Sample*>& generator, const LogPiFn& log_pi) {
  DiscriminatorLoss l = discriminator_loss(model, expert, generator, log_pi);
  if (!std::isfinite(l.loss)) throw Error(ErrorCode::NonFiniteInput, "discriminator loss is not finite");
  nn::adam_step(model.net(), l.gradient, model.optimizer());
  return l;
}

/// Frozen reward r(c, s, a) = f_θ(c, s, a) − log π(a | c, s).
class LearnedReward {
 public:
  LearnedReward() = default;
  explicit LearnedReward(const DiscriminatorModel& model) : model_(model) {}

  double f(const TeamState& s, const TeamAction& a) const { return model_.f(s, a); }
  double operator()(const TeamState& s, const TeamAction& a, double log_pi) const {
    return extract_reward(f(s, a), log_pi);
  }
  const DiscriminatorModel& model() const noexcept { return model_; }

 private:
  DiscriminatorModel model_;
};

/// Sum of the learned reward over each trajectory's records.
inline std::vector<double> evaluate_learned_reward(const LearnedReward& reward,
                                                   const std::vector<OpenTrajectory>& trajectories,
                                                   const LogPiFn& log_pi) {
  std::vector<double> scores;
  const auto& reg = reward.model().features().registry();
  for (const auto& traj : trajectories) {
    const auto violations = validate_trajectory(traj, reg);
    if (!violations.empty()) throw Error(ErrorCode::MalformedRecord, "trajectory record " +
                                                                     std::to_string(violations.front().index) + ": " +
                                                                     violations.front().detail);
    double total = 0.0;
    for (const auto& rec : traj.records) total += reward(rec.state, rec.action, log_pi(rec.state, rec.action));
    scores.push_back(total);
  }
  return scores;
}

/// Probability that a random positive outscores a random negative (ties count ½).
inline double ranking_auc(const std::vector<double>& positives, const std::vector<double>& negatives) {
  if (positives.empty() || negatives.empty()) return 0.5;
  double wins = 0.0;
  for (double p : positives)
    for (double q : negatives) wins += p > q ? 1.0 : (p == q ? 0.5 : 0.0);
  return wins / (double(positives.size()) * double(negatives.size()));
}

}  // namespace odec::irl
