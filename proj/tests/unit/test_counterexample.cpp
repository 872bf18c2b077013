#include <gtest/gtest.h>

#include <cmath>

#include "plsgd/counterexample.hpp"
#include "plsgd/errors.hpp"

using namespace plsgd;

namespace {

double radical_inverse(std::uint64_t i, std::uint64_t base) {
  double f = 1.0, r = 0.0;
  while (i > 0) {
    f /= static_cast<double>(base);
    r += f * static_cast<double>(i % base);
    i /= base;
  }
  return r;
}

// Quasi-Monte Carlo convolution of the raw function with the bump kernel
// exp(-1 / (1 - |z|^2)) on the unit disk, scaled to radius epsilon.
double qmc_mollified(const CounterexampleSpec& spec, double x, double y,
                     std::uint64_t points) {
  double num = 0.0, den = 0.0;
  for (std::uint64_t i = 1; i <= points; ++i) {
    const double u = 2.0 * radical_inverse(i, 2) - 1.0;
    const double v = 2.0 * radical_inverse(i, 3) - 1.0;
    const double room = 1.0 - u * u - v * v;
    if (room <= 0.0) continue;
    const double k = std::exp(-1.0 / room);
    num += k * counterexample_raw(spec, x - spec.epsilon * u, y - spec.epsilon * v);
    den += k;
  }
  return num / den;
}

// Real root of 2x^3 + 3x - 2 = 0 by Cardano (depressed cubic x^3 + px + q).
double cardano_root() {
  const double p = 1.5, q = -1.0;
  const double disc = std::sqrt(q * q / 4.0 + p * p * p / 27.0);
  return std::cbrt(-q / 2.0 + disc) + std::cbrt(-q / 2.0 - disc);
}

}  // namespace

TEST(Counterexample, RawFunctionShape) {
  const auto spec = default_counterexample();
  EXPECT_EQ(counterexample_raw(spec, -1.0, 0.3), 0.0);
  EXPECT_EQ(counterexample_raw(spec, 2.0, 0.0), 4.0);
  EXPECT_EQ(counterexample_raw(spec, 1.0, 1.5), 0.5);
  EXPECT_EQ(counterexample_raw(spec, 1.0, 3.0), 0.0);
}

TEST(Counterexample, VanishesFarInsideTheLeftHalfPlane) {
  CounterexampleSpec spec;
  spec.epsilon = 0.5;
  const auto m = counterexample_eval(spec, {-2.0, 0.0});
  EXPECT_EQ(m.value, 0.0);
  EXPECT_EQ(m.gradient[0], 0.0);
  EXPECT_EQ(m.gradient[1], 0.0);
}

TEST(Counterexample, SmallEpsilonRecoversTheLocalQuadratic) {
  CounterexampleSpec spec;
  spec.epsilon = 0.01;
  const auto m = counterexample_eval(spec, {2.0, 0.0});
  EXPECT_NEAR(m.value, 4.0, 1e-3);
  EXPECT_NEAR(m.gradient[0], 4.0, 1e-6);
  EXPECT_NEAR(m.gradient[1], 0.0, 1e-9);
}

TEST(Counterexample, MatchesQuasiMonteCarloConvolution) {
  CounterexampleSpec spec;
  spec.epsilon = 0.25;
  for (auto pt : {std::array<double, 2>{0.5, 0.0}, {0.1, 0.2}, {1.0, 1.1},
                  {0.7, -1.9}}) {
    const double ref = qmc_mollified(spec, pt[0], pt[1], 1000000);
    const auto m = counterexample_eval(spec, pt);
    EXPECT_NEAR(m.value, ref, 2e-4 * std::max(1.0, ref))
        << pt[0] << "," << pt[1];
  }
  EXPECT_NEAR(counterexample_eval(spec, {0.5, 0.0}).value, 0.25, 0.02);
}

TEST(Counterexample, GradientMatchesFiniteDifferences) {
  const auto spec = default_counterexample();
  for (auto pt : {std::array<double, 2>{0.3, 0.1}, {0.05, 0.0}, {1.2, 1.4}}) {
    const auto m = counterexample_eval(spec, pt);
    const double h = 1e-5;
    const double gx = (counterexample_eval(spec, {pt[0] + h, pt[1]}).value -
                       counterexample_eval(spec, {pt[0] - h, pt[1]}).value) /
                      (2 * h);
    const double gy = (counterexample_eval(spec, {pt[0], pt[1] + h}).value -
                       counterexample_eval(spec, {pt[0], pt[1] - h}).value) /
                      (2 * h);
    EXPECT_NEAR(m.gradient[0], gx, 1e-5);
    EXPECT_NEAR(m.gradient[1], gy, 1e-5);
  }
}

TEST(Counterexample, DistanceToMinimizersSolvesTheCubic) {
  const auto spec = default_counterexample();
  const double x = cardano_root();
  EXPECT_NEAR(2 * x * x * x + 3 * x - 2, 0.0, 1e-14);
  const double r = std::hypot(x - 2.0, x * x + 1.0);
  EXPECT_NEAR(distance_to_minimizers(spec), r, 1e-12);
  EXPECT_NEAR(spec.radius, r - 1e-6, 1e-12);
  EXPECT_NEAR(spec.start_x - spec.radius, 0.051, 1e-3);
}

TEST(Counterexample, StartNearOriginIsCloserToTheHalfPlane) {
  CounterexampleSpec spec;
  spec.start_x = 0.1;
  EXPECT_NEAR(distance_to_minimizers(spec), 0.1, 1e-15);
}

TEST(Counterexample, ValidationRejectsBadSpecs) {
  CounterexampleSpec spec;
  spec.epsilon = 1.0;
  EXPECT_THROW(spec.validate(), InvalidArgument);
  spec = CounterexampleSpec{};
  spec.order = 4;
  EXPECT_THROW(spec.validate(), InvalidArgument);
  EXPECT_THROW(counterexample_eval(CounterexampleSpec{}, {NAN, 0.0}), NumericError);
}

TEST(GaussLegendre, IntegratesPolynomialsExactly) {
  const auto& rule = gauss_legendre(8);
  ASSERT_EQ(rule.nodes.size(), 8u);
  for (int k = 0; k <= 15; ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i < 8; ++i)
      acc += rule.weights[i] * std::pow(rule.nodes[i], k);
    const double exact = k % 2 ? 0.0 : 2.0 / (k + 1);
    EXPECT_NEAR(acc, exact, 1e-14) << k;
  }
}
