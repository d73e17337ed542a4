#pragma once

#include <cmath>

#include "odec/nn/mlp.hpp"

namespace odec::nn {

struct AdamState {
  Vector m;
  Vector v;
  long step = 0;
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  AdamState() = default;
  AdamState(Eigen::Index n, double learning_rate) : m(Vector::Zero(n)), v(Vector::Zero(n)), lr(learning_rate) {}
};

/// One bias-corrected Adam update of `params` in place.
inline void adam_step(Vector& params, const Vector& grads, AdamState& opt) {
  if (grads.size() != params.size() || opt.m.size() != params.size() || opt.v.size() != params.size())
    throw Error(ErrorCode::ShapeError, "adam: parameter, gradient and moment sizes differ");
  if (!grads.allFinite()) throw Error(ErrorCode::NonFiniteGradient, "adam: gradient has non-finite entries");
  ++opt.step;
  opt.m = opt.beta1 * opt.m + (1.0 - opt.beta1) * grads;
  opt.v = opt.beta2 * opt.v + (1.0 - opt.beta2) * grads.cwiseProduct(grads);
  const double c1 = 1.0 - std::pow(opt.beta1, static_cast<double>(opt.step));
  const double c2 = 1.0 - std::pow(opt.beta2, static_cast<double>(opt.step));
  params.array() -= opt.lr * (opt.m.array() / c1) / ((opt.v.array() / c2).sqrt() + opt.eps);
}

inline void adam_step(Mlp& net, const Vector& grads, AdamState& opt) {
  adam_step(net.mutable_parameters(), grads, opt);
  net.touch();
}

/// Rescales `grads` so its Euclidean norm is at most `max_norm`; returns the original norm.
inline double clip_grad_norm(Vector& grads, double max_norm) {
  const double norm = grads.norm();
  if (max_norm > 0.0 && norm > max_norm) grads *= max_norm / norm;
  return norm;
}

}  // namespace odec::nn
