#include <cmath>

#include "odec/nn/adam.hpp"
#include "odec/nn/gradient_check.hpp"
#include "odec/nn/mlp.hpp"
#include "support.hpp"

using namespace odec;
using namespace odec::nn;

namespace {

Vector random_vector(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = g(rng);
  return v;
}

/// Straight-line re-evaluation of a tanh network from raw parameter offsets.
std::vector<double> reference_forward(const Mlp& net, const std::vector<double>& x0) {
  const auto& sizes = net.layer_sizes();
  const double* p = net.parameters().data();
  std::vector<double> x = x0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const int in = sizes[l], out = sizes[l + 1];
    const double* w = p + net.weight_offset(static_cast<int>(l));
    const double* b = p + net.bias_offset(static_cast<int>(l));
    std::vector<double> y(static_cast<std::size_t>(out));
    for (int i = 0; i < out; ++i) {
      double z = b[i];
      for (int j = 0; j < in; ++j) z += w[i + j * out] * x[static_cast<std::size_t>(j)];  // column-major
      y[static_cast<std::size_t>(i)] = l + 2 == sizes.size() ? z : std::tanh(z);
    }
    x = std::move(y);
  }
  return x;
}

}  // namespace

TEST(Mlp, ZeroParametersGiveZeroOutput) {
  Mlp net({3, 5, 2}, Activation::Tanh, 1);
  net.set_parameters(Vector::Zero(net.parameter_count()));
  EXPECT_TRUE(net.forward(random_vector(3, 2)).isZero());
}

TEST(Mlp, IdentityLinearLayer) {
  Mlp net({4, 4}, Activation::Linear, 1);
  Vector p = Vector::Zero(net.parameter_count());
  net.set_parameters(p);
  net.weight(0) = Matrix::Identity(4, 4);
  net.touch();
  const Vector x = random_vector(4, 3);
  EXPECT_EQ(net.forward(x), x);
}

TEST(Mlp, MatchesIndependentRecomputation) {
  Mlp net({4, 8, 2}, Activation::Tanh, 9, 1.0);
  Vector p = random_vector(static_cast<int>(net.parameter_count()), 4);
  net.set_parameters(p);
  const Vector x = random_vector(4, 5);
  const Vector y = net.forward(x);
  const auto ref = reference_forward(net, std::vector<double>(x.data(), x.data() + x.size()));
  for (int i = 0; i < 2; ++i) EXPECT_NEAR(y[i], ref[static_cast<std::size_t>(i)], 1e-12);
}

TEST(Mlp, BatchedForwardMatchesColumns) {
  Mlp net({3, 6, 6, 2}, Activation::Tanh, 2, 1.0);
  Matrix x(3, 5);
  for (int j = 0; j < 5; ++j) x.col(j) = random_vector(3, 10 + j);
  const Matrix y = net.forward(x);
  for (int j = 0; j < 5; ++j) EXPECT_TRUE(y.col(j).isApprox(net.forward(Vector(x.col(j))), 1e-14));
}

TEST(Mlp, ZeroUpstreamGivesZeroGradient) {
  Mlp net({3, 4, 2}, Activation::Tanh, 1);
  ForwardCache cache;
  net.forward(random_vector(3, 1), &cache);
  EXPECT_TRUE(net.backward(cache, Matrix::Zero(2, 1)).isZero());
}

TEST(Mlp, LinearLayerGradientIsTheInput) {
  Mlp net({3, 2}, Activation::Linear, 1);
  const Vector x = random_vector(3, 7);
  ForwardCache cache;
  net.forward(x, &cache);
  Matrix up = Matrix::Zero(2, 1);
  up(0, 0) = 1.0;
  const Vector g = net.backward(cache, up);
  for (int j = 0; j < 3; ++j) EXPECT_EQ(g[net.weight_offset(0) + j * 2], x[j]);  // row 0 of W
  for (int j = 0; j < 3; ++j) EXPECT_EQ(g[net.weight_offset(0) + j * 2 + 1], 0.0);
  EXPECT_EQ(g[net.bias_offset(0)], 1.0);
}

TEST(Mlp, StaleCacheIsRejected) {
  Mlp net({3, 2}, Activation::Tanh, 1);
  ForwardCache cache;
  net.forward(random_vector(3, 1), &cache);
  net.touch();
  EXPECT_ODEC_ERROR(net.backward(cache, Matrix::Zero(2, 1)), ErrorCode::CacheMismatch);
  Mlp other({3, 2}, Activation::Tanh, 1);
  EXPECT_ODEC_ERROR(other.backward(cache, Matrix::Zero(2, 1)), ErrorCode::CacheMismatch);
}

TEST(Mlp, ShapeErrors) {
  EXPECT_ODEC_ERROR(Mlp({3}, Activation::Tanh), ErrorCode::ShapeError);
  EXPECT_ODEC_ERROR(Mlp({3, 0, 1}, Activation::Tanh), ErrorCode::ShapeError);
  Mlp net({3, 2}, Activation::Tanh);
  EXPECT_ODEC_ERROR(net.forward(Vector(Vector::Zero(4))), ErrorCode::ShapeError);
}

TEST(GradientCheck, AffineNetIsExact) {
  Mlp net({5, 3}, Activation::Linear, 3, 1.0);
  EXPECT_LE(finite_diff_check(net, random_vector(5, 1), 1e-2), 1e-10);  // exact for affine maps at any step
}

TEST(GradientCheck, TanhNet) {
  Mlp net({4, 8, 4}, Activation::Tanh, 3, 1.0);
  EXPECT_LT(finite_diff_check(net, random_vector(4, 2), 1e-5), 1e-4);
}

TEST(GradientCheck, ReluNet) {
  Mlp net({4, 16, 3}, Activation::Relu, 8, 1.0);
  EXPECT_LT(finite_diff_check(net, random_vector(4, 5), 1e-6), 1e-4);
}

TEST(GradientCheck, InputGradientMatchesFiniteDifferences) {
  Mlp net({4, 8, 1}, Activation::Tanh, 3, 1.0);
  const Vector x = random_vector(4, 6);
  ForwardCache cache;
  net.forward(x, &cache);
  Matrix dx;
  net.backward(cache, Matrix::Ones(1, 1), &dx);
  auto loss = [&](const Vector& in) { return net.forward(in)[0]; };
  const double err = max_relative_gradient_error(x, loss, Vector(dx.col(0)), 1e-6);
  EXPECT_LT(err, 1e-6);
}

TEST(GradientCheck, DetectsCorruptedGradient) {
  Mlp net({4, 8, 4}, Activation::Tanh, 3, 1.0);
  const Vector x = random_vector(4, 2);
  const Vector w = projection_vector(4);
  ForwardCache cache;
  net.forward(x, &cache);
  Vector g = net.backward(cache, Matrix(w));
  Eigen::Index big = 0;
  g.cwiseAbs().maxCoeff(&big);
  g[big] *= 2.0;
  EXPECT_NEAR(gradient_error(net, x, g, 1e-5), 1.0, 1e-3);
}

TEST(Adam, ZeroGradientLeavesParametersUnchanged) {
  Vector p = random_vector(6, 1);
  const Vector before = p;
  AdamState opt(6, 1e-2);
  for (int i = 0; i < 10; ++i) adam_step(p, Vector::Zero(6), opt);
  EXPECT_EQ(p, before);
}

TEST(Adam, ConstantGradientStepApproachesStepSize) {
  Vector p = Vector::Zero(3);
  AdamState opt(3, 1e-3);
  Vector g(3);
  g << 0.5, -2.0, 1e-3;
  Vector prev = p;
  for (int i = 0; i < 2000; ++i) {
    prev = p;
    adam_step(p, g, opt);
  }
  const Vector step = p - prev;
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(std::abs(step[i]), 1e-3, 1e-5);
  EXPECT_LT(step[0], 0.0);
  EXPECT_GT(step[1], 0.0);
}

TEST(Adam, Deterministic) {
  Vector a = random_vector(5, 3), b = a;
  AdamState sa(5, 1e-2), sb(5, 1e-2);
  const Vector g = random_vector(5, 4);
  adam_step(a, g, sa);
  adam_step(b, g, sb);
  EXPECT_EQ(a, b);
}

TEST(Adam, RejectsNonFiniteGradients) {
  Vector p = Vector::Zero(2);
  AdamState opt(2, 1e-2);
  Vector g(2);
  g << 1.0, std::nan("");
  EXPECT_ODEC_ERROR(adam_step(p, g, opt), ErrorCode::NonFiniteGradient);
}

TEST(Adam, ClipGradNorm) {
  Vector g(2);
  g << 3.0, 4.0;
  EXPECT_DOUBLE_EQ(clip_grad_norm(g, 1.0), 5.0);
  EXPECT_NEAR(g.norm(), 1.0, 1e-15);
}
