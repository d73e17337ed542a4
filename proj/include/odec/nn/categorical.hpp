#pragma once

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "odec/nn/mlp.hpp"

namespace odec::nn {

/// Softmax distribution over action logits, optionally restricted by a mask
/// (masked-out actions get probability exactly zero).
class Categorical {
 public:
  explicit Categorical(const Vector& logits, const std::vector<bool>& mask = {}) {
    const auto k = logits.size();
    if (k < 1) throw Error(ErrorCode::ShapeError, "categorical head needs at least one logit");
    if (!logits.allFinite()) throw Error(ErrorCode::NonFiniteLogits, "logits contain non-finite values");
    if (!mask.empty() && static_cast<Eigen::Index>(mask.size()) != k)
      throw Error(ErrorCode::ShapeError, "mask length differs from logit count");
    allowed_.assign(static_cast<std::size_t>(k), true);
    if (!mask.empty()) allowed_.assign(mask.begin(), mask.end());

    double top = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < k; ++i)
      if (allowed_[i]) top = std::max(top, logits[i]);
    if (top == -std::numeric_limits<double>::infinity())
      throw Error(ErrorCode::ShapeError, "mask excludes every action");

    double sum = 0.0;
    for (Eigen::Index i = 0; i < k; ++i)
      if (allowed_[i]) sum += std::exp(logits[i] - top);
    const double log_z = top + std::log(sum);
    log_probs_ = Vector::Constant(k, -std::numeric_limits<double>::infinity());
    probs_ = Vector::Zero(k);
    for (Eigen::Index i = 0; i < k; ++i) {
      if (!allowed_[i]) continue;
      log_probs_[i] = logits[i] - log_z;
      probs_[i] = std::exp(log_probs_[i]);
    }
    entropy_ = 0.0;
    for (Eigen::Index i = 0; i < k; ++i)
      if (probs_[i] > 0.0) entropy_ -= probs_[i] * log_probs_[i];
  }

  int size() const noexcept { return static_cast<int>(probs_.size()); }
  const Vector& probabilities() const noexcept { return probs_; }
  const Vector& log_probabilities() const noexcept { return log_probs_; }
  double log_prob(int action) const { return log_probs_[action]; }
  double prob(int action) const { return probs_[action]; }
  double entropy() const noexcept { return entropy_; }

  /// Most probable allowed action (lowest index on ties).
  int mode() const {
    int best = -1;
    for (int i = 0; i < size(); ++i)
      if (allowed_[i] && (best < 0 || probs_[i] > probs_[best])) best = i;
    return best;
  }

  template <class Rng>
  int sample(Rng& rng) const {
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    double acc = 0.0;
    int last = -1;
    for (int i = 0; i < size(); ++i) {
      if (!allowed_[i]) continue;
      acc += probs_[i];
      last = i;
      if (u < acc) return i;
    }
    return last;
  }

  /// ∂ log π(a) / ∂ logits = e_a − p.
  Vector log_prob_gradient(int action) const {
    Vector g = -probs_;
    g[action] += 1.0;
    return g;
  }

  /// ∂ H / ∂ logits = −p ⊙ (log p + H), zero on masked entries.
  Vector entropy_gradient() const {
    Vector g = Vector::Zero(size());
    for (int i = 0; i < size(); ++i)
      if (probs_[i] > 0.0) g[i] = -probs_[i] * (log_probs_[i] + entropy_);
    return g;
  }

 private:
  std::vector<bool> allowed_;
  Vector probs_;
  Vector log_probs_;
  double entropy_ = 0.0;
};

struct SampledAction {
  int action;
  double log_prob;
};

/// Samples from softmax(logits) and returns the action with its exact log-probability.
template <class Rng>
SampledAction categorical_head(const Vector& logits, Rng& rng, const std::vector<bool>& mask = {}) {
  Categorical dist(logits, mask);
  const int a = dist.sample(rng);
  return {a, dist.log_prob(a)};
}

}  // namespace odec::nn
