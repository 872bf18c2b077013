#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "plsgd/errors.hpp"
#include "plsgd/norms.hpp"
#include "plsgd/rng.hpp"

using namespace plsgd;

namespace {

std::vector<double> normals(std::size_t n, std::uint64_t seed) {
  CounterRng r(seed, Purpose::kProbe, 0, 0);
  std::vector<double> out(n);
  for (double& v : out) v = r.normal();
  return out;
}

}  // namespace

TEST(SubGaussianNorm, ZeroSamplesGiveZero) {
  EXPECT_EQ(subgaussian_norm_estimate(std::vector<double>(100, 0.0)), 0.0);
  EXPECT_EQ(subexponential_norm_estimate(std::vector<double>(100, 0.0)), 0.0);
}

TEST(SubGaussianNorm, StandardNormalMatchesClosedForm) {
  // E exp(X^2 / s^2) = (1 - 2/s^2)^{-1/2} = e  =>  s^2 = 2 / (1 - e^{-2}).
  // exp(X^2 / s^2) has infinite variance at this s, so a single 10^6-sample
  // estimate scatters by about 0.04; the mean of 8 independent ones does not.
  const double expected = std::sqrt(2.0 / (1.0 - std::exp(-2.0)));
  double total = 0.0;
  for (std::uint64_t seed = 1; seed <= 8; ++seed)
    total += subgaussian_norm_estimate(normals(1000000, seed));
  EXPECT_NEAR(total / 8.0, expected, 0.02);
}

TEST(SubGaussianNorm, HomogeneousInScale) {
  auto xs = normals(5000, 2);
  const double base = subgaussian_norm_estimate(xs);
  for (double& v : xs) v *= 3.0;
  EXPECT_NEAR(subgaussian_norm_estimate(xs), 3.0 * base, 3.0 * base * 2e-6);
}

TEST(SubExponentialNorm, ConstantOneGivesOne) {
  EXPECT_NEAR(subexponential_norm_estimate(std::vector<double>(100, 1.0)), 1.0, 1e-6);
}

TEST(SubExponentialNorm, SquaredNormalsMatchSquaredGaussianNorm) {
  auto xs = normals(1000000, 3);
  for (double& v : xs) v *= v;
  const double g2 = 2.0 / (1.0 - std::exp(-2.0));
  EXPECT_NEAR(subexponential_norm_estimate(xs), g2, 0.05);
}

TEST(Norms, RejectSmallOrNonFiniteSamples) {
  EXPECT_THROW(subgaussian_norm_estimate(std::vector<double>(99, 1.0)), InvalidArgument);
  std::vector<double> bad(200, 1.0);
  bad[17] = NAN;
  EXPECT_THROW(subexponential_norm_estimate(bad), NumericError);
}
