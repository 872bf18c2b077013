#include "plsgd/norms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "plsgd/errors.hpp"

namespace plsgd {

namespace {

constexpr std::size_t kMinSamples = 100;
constexpr double kRelativeTolerance = 1e-6;

// log(mean(exp(t_i / s))) for t_i >= 0 via a shifted log-sum-exp.
double log_mean_exp(const std::vector<double>& terms, double scale) {
  double peak = 0.0;
  for (double t : terms) peak = std::max(peak, t / scale);
  double total = 0.0;
  for (double t : terms) total += std::exp(t / scale - peak);
  return peak + std::log(total / static_cast<double>(terms.size()));
}

// Smallest tau with mean(exp(t_i / tau^power)) <= e, where the t_i are
// normalized to max 1.
double bisect(const std::vector<double>& terms, int power) {
  auto feasible = [&](double tau) {
    return log_mean_exp(terms, std::pow(tau, power)) <= 1.0;
  };
  double lo = 1e-12;
  double hi = 10.0;
  while (hi - lo > kRelativeTolerance * hi) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? hi : lo) = mid;
  }
  return hi;
}

double estimate(std::span<const double> samples, int power) {
  if (samples.size() < kMinSamples) {
    throw InvalidArgument("norm estimation needs at least 100 samples");
  }
  double scale = 0.0;
  for (double x : samples) {
    if (!std::isfinite(x)) throw NumericError("non-finite sample");
    scale = std::max(scale, std::abs(x));
  }
  if (scale == 0.0) return 0.0;
  std::vector<double> terms;
  terms.reserve(samples.size());
  for (double x : samples) {
    const double z = std::abs(x) / scale;
    terms.push_back(power == 2 ? z * z : z);
  }
  return scale * bisect(terms, power);
}

}  // namespace

double subgaussian_norm_estimate(std::span<const double> samples) {
  return estimate(samples, 2);
}

double subexponential_norm_estimate(std::span<const double> samples) {
  return estimate(samples, 1);
}

}  // namespace plsgd
