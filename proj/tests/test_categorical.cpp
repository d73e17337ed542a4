#include <cmath>
#include <random>

#include "odec/nn/categorical.hpp"
#include "odec/nn/gradient_check.hpp"
#include "support.hpp"

using namespace odec;
using namespace odec::nn;

TEST(Categorical, EqualLogitsAreUniform) {
  const Categorical d(Vector::Constant(6, 0.3));
  for (int a = 0; a < 6; ++a) {
    EXPECT_NEAR(d.prob(a), 1.0 / 6.0, 1e-15);
    EXPECT_NEAR(d.log_prob(a), -std::log(6.0), 1e-14);
  }
  EXPECT_NEAR(d.entropy(), std::log(6.0), 1e-14);
}

TEST(Categorical, DominantLogit) {
  Vector l = Vector::Zero(4);
  l[2] = 1000.0;
  const Categorical d(l);
  EXPECT_NEAR(d.prob(2), 1.0, 1e-12);
  EXPECT_NEAR(d.entropy(), 0.0, 1e-12);
  EXPECT_EQ(d.mode(), 2);
}

TEST(Categorical, SamplingFrequencies) {
  Vector l(2);
  l << 0.0, std::log(2.0);
  std::mt19937_64 rng(123);
  long ones = 0;
  const long n = 1'000'000;
  for (long i = 0; i < n; ++i) ones += categorical_head(l, rng).action;
  EXPECT_NEAR(double(ones) / double(n), 2.0 / 3.0, 0.005);
}

TEST(Categorical, SampledLogProbIsExact) {
  Vector l(3);
  l << 0.1, -0.4, 2.0;
  std::mt19937_64 rng(1);
  const auto s = categorical_head(l, rng);
  const double z = std::exp(0.1) + std::exp(-0.4) + std::exp(2.0);
  EXPECT_NEAR(s.log_prob, l[s.action] - std::log(z), 1e-14);
}

TEST(Categorical, MaskExcludesActions) {
  Vector l = Vector::Zero(4);
  l[1] = 5.0;
  const Categorical d(l, {true, false, true, true});
  EXPECT_EQ(d.prob(1), 0.0);
  EXPECT_NEAR(d.prob(0), 1.0 / 3.0, 1e-15);
  EXPECT_NE(d.mode(), 1);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 1000; ++i) EXPECT_NE(d.sample(rng), 1);
  EXPECT_NEAR(d.entropy(), std::log(3.0), 1e-14);
}

TEST(Categorical, Errors) {
  EXPECT_ODEC_ERROR(Categorical{Vector()}, ErrorCode::ShapeError);
  Vector bad(2);
  bad << 0.0, std::nan("");
  EXPECT_ODEC_ERROR(Categorical{bad}, ErrorCode::NonFiniteLogits);
  EXPECT_ODEC_ERROR(Categorical(Vector::Zero(2), {true}), ErrorCode::ShapeError);
  EXPECT_ODEC_ERROR(Categorical(Vector::Zero(2), {false, false}), ErrorCode::ShapeError);
}

TEST(Categorical, PropertiesOnRandomLogits) {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> g(0.0, 3.0);
  for (int trial = 0; trial < 500; ++trial) {
    const int k = 2 + trial % 7;
    Vector l(k);
    for (int i = 0; i < k; ++i) l[i] = g(rng);
    const Categorical d(l);
    EXPECT_NEAR(d.probabilities().sum(), 1.0, 1e-12);
    EXPECT_GE(d.entropy(), 0.0);
    EXPECT_LE(d.entropy(), std::log(double(k)) + 1e-12);
  }
}

TEST(Categorical, AnalyticGradientsMatchFiniteDifferences) {
  Vector l(5);
  l << 0.3, -1.2, 0.8, 0.0, 2.1;
  const std::vector<bool> mask{true, true, false, true, true};
  const Categorical d(l, mask);
  auto log_prob = [&](const Vector& x) { return Categorical(x, mask).log_prob(3); };
  auto entropy = [&](const Vector& x) { return Categorical(x, mask).entropy(); };
  Vector g = d.log_prob_gradient(3);
  g[2] = 0.0;
  EXPECT_LT(max_relative_gradient_error(l, log_prob, g, 1e-6), 1e-6);
  EXPECT_LT(max_relative_gradient_error(l, entropy, d.entropy_gradient(), 1e-6), 1e-6);
}
