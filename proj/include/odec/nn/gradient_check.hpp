#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "odec/nn/mlp.hpp"

namespace odec::nn {

/// Relative error floor: gradients smaller than this are compared absolutely.
inline constexpr double kGradientFloor = 1e-6;

/// Worst |analytic − central difference| / max(|central difference|, floor)
/// over every coordinate of `params`. `loss` is evaluated at perturbed copies.
inline double max_relative_gradient_error(const Vector& params, const std::function<double(const Vector&)>& loss,
                                          const Vector& analytic, double h) {
  if (analytic.size() != params.size()) throw Error(ErrorCode::ShapeError, "gradient size mismatch");
  Vector probe = params;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + h;
    const double up = loss(probe);
    probe[i] = orig - h;
    const double down = loss(probe);
    probe[i] = orig;
    const double numeric = (up - down) / (2.0 * h);
    const double err = std::abs(analytic[i] - numeric) / std::max(std::abs(numeric), kGradientFloor);
    worst = std::max(worst, err);
  }
  return worst;
}

/// Fixed pseudo-random projection used to reduce a network output to a scalar.
inline Vector projection_vector(int size, std::uint64_t seed = 7) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector w(size);
  for (int i = 0; i < size; ++i) w[i] = u(rng);
  return w;
}

/// Compares a supplied parameter gradient of ⟨w, net(input)⟩ against central differences.
inline double gradient_error(const Mlp& net, const Vector& input, const Vector& analytic, double h,
                             std::uint64_t projection_seed = 7) {
  const Vector w = projection_vector(net.output_size(), projection_seed);
  Mlp scratch = net;
  auto loss = [&](const Vector& p) {
    scratch.set_parameters(p);
    return w.dot(scratch.forward(input));
  };
  return max_relative_gradient_error(net.parameters(), loss, analytic, h);
}

/// Checks `Mlp::backward` against central differences of ⟨w, net(input)⟩.
inline double finite_diff_check(const Mlp& net, const Vector& input, double h = 1e-5,
                                std::uint64_t projection_seed = 7) {
  const Vector w = projection_vector(net.output_size(), projection_seed);
  ForwardCache cache;
  net.forward(input, &cache);
  const Vector analytic = net.backward(cache, Matrix(w));
  return gradient_error(net, input, analytic, h, projection_seed);
}

}  // namespace odec::nn
