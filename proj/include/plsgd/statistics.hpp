#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace plsgd {

/// Nearest-rank order statistic of already sorted values: the
/// ceil(level * n)-th smallest (1-based), level in [0, 1].
double sorted_quantile(std::span<const double> sorted, double level);

/// One-sided Clopper-Pearson upper confidence bound on a binomial
/// proportion after `successes` out of `trials`.
double binomial_upper_bound(std::uint64_t successes, std::uint64_t trials,
                            double confidence = 0.99);

/// delta + 3 sqrt(delta (1 - delta) / n): exceedance tolerance at 3 sigma.
double exceedance_tolerance(double delta, std::uint64_t n);

/// Least-squares slope of log(y) against log(x). Throws InvalidArgument on
/// nonpositive entries or fewer than two distinct x.
double loglog_slope(std::span<const double> x, std::span<const double> y);

/// Roughly `count` distinct integers spaced evenly in log between lo and hi.
std::vector<std::int64_t> log_grid(std::int64_t lo, std::int64_t hi,
                                   int count);

/// One-sided standard normal quantile used for 99% Monte Carlo slack.
inline constexpr double kZ99 = 2.3263478740408408;

}  // namespace plsgd
