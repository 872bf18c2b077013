#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "plsgd/errors.hpp"
#include "plsgd/oracles.hpp"
#include "plsgd/problems.hpp"

using namespace plsgd;

namespace {

LogisticOptions with_pilot(int points) {
  LogisticOptions o;
  o.pilot_points = points;
  return o;
}

std::shared_ptr<const QuadraticProblem> unit_quadratic(int d, bool split = false) {
  return make_quadratic(d, std::vector<double>(d, 1.0), std::vector<double>(d, 0.0),
                        split);
}

}  // namespace

TEST(Oracle, NoiselessAdditiveModesReturnTheGradient) {
  const auto p = unit_quadratic(4);
  const Vector x = Vector::LinSpaced(4, -1.0, 2.0);
  for (auto mode : {OracleMode::kAdditiveGaussian, OracleMode::kAdditiveBounded}) {
    GradientOracle o{mode, 0.0, 3, 5};
    const auto s = sample_gradient(o, *p, x, 0, 0);
    EXPECT_EQ(s.gradient, p->gradient(x));
    EXPECT_EQ(s.error.squaredNorm(), 0.0);
    EXPECT_EQ(s.true_gradient, p->gradient(x));
  }
}

TEST(Oracle, ErrorIsTrueGradientMinusSample) {
  const auto p = unit_quadratic(3);
  const Vector x = Vector::Ones(3);
  GradientOracle o{OracleMode::kAdditiveGaussian, 2.0, 1, 8};
  const auto s = sample_gradient(o, *p, x, 2, 9);
  EXPECT_NEAR((s.true_gradient - s.gradient - s.error).norm(), 0.0, 1e-15);
}

TEST(Oracle, FullBatchFiniteSumIsExact) {
  const auto p = make_logistic(12, 3, 2, 0.1, with_pilot(100));
  const Vector x = Vector::Constant(3, 0.4);
  GradientOracle o{OracleMode::kFiniteSumSubsample, 1.0, 12, 1};
  const auto s = sample_gradient(o, *p, x, 0, 0);
  EXPECT_NEAR((s.gradient - p->gradient(x)).norm(), 0.0, 1e-14);
}

TEST(Oracle, GaussianErrorEnergyIsSigmaSquaredOverBatch) {
  const auto p = unit_quadratic(10);
  const Vector x = Vector::Zero(10);
  GradientOracle o{OracleMode::kAdditiveGaussian, 1.0, 4, 21};
  const int n = 1000000;
  double acc = 0.0;
  for (int i = 0; i < n; ++i)
    acc += sample_gradient(o, *p, x, static_cast<std::uint32_t>(i % 1000),
                           static_cast<std::uint32_t>(i / 1000))
               .error.squaredNorm();
  EXPECT_NEAR(acc / n, 0.25, 0.0025);
}

TEST(Oracle, BoundedNoiseHasDeclaredVarianceAndSupport) {
  const auto p = unit_quadratic(5);
  const Vector x = Vector::Zero(5);
  GradientOracle o{OracleMode::kAdditiveBounded, 2.0, 1, 3};
  const double half_width = std::sqrt(3.0) * 2.0 / std::sqrt(5.0);
  const int n = 200000;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto s = sample_gradient(o, *p, x, 0, static_cast<std::uint32_t>(i));
    EXPECT_LE(s.error.cwiseAbs().maxCoeff(), half_width);
    acc += s.error.squaredNorm();
  }
  EXPECT_NEAR(acc / n, 4.0, 0.04);
}

TEST(Oracle, FiniteSumOnQuadraticNeedsTheSplit) {
  const Vector x = Vector::Ones(3);
  GradientOracle o{OracleMode::kFiniteSumSubsample, 1.0, 1, 1};
  EXPECT_THROW(sample_gradient(o, *unit_quadratic(3), x, 0, 0), InvalidArgument);
  const auto s = sample_gradient(o, *unit_quadratic(3, true), x, 0, 0);
  // One coordinate, scaled by d.
  EXPECT_EQ((s.gradient.array() != 0.0).count(), 1);
  EXPECT_NEAR(s.gradient.sum(), 3.0, 1e-15);
}

TEST(Oracle, OversizedBatchIsRejected) {
  const auto p = make_logistic(5, 2, 2, 0.1, with_pilot(100));
  GradientOracle o{OracleMode::kFiniteSumSubsample, 1.0, 6, 1};
  EXPECT_THROW(sample_gradient(o, *p, Vector::Zero(2), 0, 0), InvalidBatch);
  EXPECT_THROW(minibatch_indices(5, 0, 1, 0, 0), InvalidBatch);
}

TEST(Oracle, DrawsArePureFunctionsOfTheCell) {
  const auto p = unit_quadratic(6);
  const Vector x = Vector::Ones(6);
  GradientOracle o{OracleMode::kAdditiveGaussian, 1.0, 2, 77};
  const auto a = sample_gradient(o, *p, x, 3, 4);
  const auto b = sample_gradient(o, *p, x, 3, 4);
  const auto c = sample_gradient(o, *p, x, 3, 5);
  EXPECT_EQ(a.gradient, b.gradient);
  EXPECT_NE(a.gradient, c.gradient);
  EXPECT_EQ(minibatch_indices(50, 5, 77, 3, 4), minibatch_indices(50, 5, 77, 3, 4));
}

TEST(Oracle, ModeNamesRoundTrip) {
  for (auto m : {OracleMode::kAdditiveGaussian, OracleMode::kAdditiveBounded,
                 OracleMode::kFiniteSumSubsample})
    EXPECT_EQ(oracle_mode_from_string(to_string(m)), m);
  EXPECT_THROW(oracle_mode_from_string("cauchy"), InvalidArgument);
}

TEST(CoupledIndices, FullBatchAlwaysHits) {
  for (std::uint32_t t = 0; t < 100; ++t) {
    const auto d = coupled_indices(7, 7, 3, t, 1);
    EXPECT_TRUE(d.hit);
    EXPECT_EQ(d.indices.size(), 7u);
  }
}

TEST(CoupledIndices, HitFlagMatchesMembership) {
  for (std::uint32_t t = 0; t < 2000; ++t) {
    const auto d = coupled_indices(30, 4, 11, t, 5, 2);
    const bool member =
        std::find(d.indices.begin(), d.indices.end(), 11u) != d.indices.end();
    ASSERT_EQ(d.hit, member);
  }
  EXPECT_THROW(coupled_indices(10, 2, 10, 0, 1), InvalidArgument);
}

TEST(CoupledIndices, HitRateIsBatchOverN) {
  const std::uint32_t n = 1000000;
  std::uint64_t hits = 0;
  for (std::uint32_t t = 0; t < n; ++t) hits += coupled_indices(100, 1, 42, t, 9).hit;
  EXPECT_NEAR(static_cast<double>(hits) / n, 0.01, 0.0005);
}

TEST(CoupledIndices, AllSubsetsEquallyLikely) {
  const std::uint32_t draws = 1000000;
  std::map<std::vector<std::uint32_t>, std::uint32_t> counts;
  for (std::uint32_t t = 0; t < draws; ++t) ++counts[coupled_indices(10, 3, 0, t, 4).indices];
  ASSERT_EQ(counts.size(), 120u);
  const double p = 1.0 / 120.0;
  const double slack = 3.0 * std::sqrt(p * (1 - p) / draws);
  // 120 cells at 3 sigma: allow the Bonferroni-free expectation of a few
  // excursions, but never beyond 4.5 sigma.
  int beyond3 = 0;
  for (const auto& [s, c] : counts) {
    const double freq = static_cast<double>(c) / draws;
    EXPECT_LE(std::abs(freq - p), 1.5 * slack);
    beyond3 += std::abs(freq - p) > slack;
  }
  EXPECT_LE(beyond3, 3);
}
