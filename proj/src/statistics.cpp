#include "plsgd/statistics.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/binomial.hpp>

#include "plsgd/errors.hpp"

namespace plsgd {

double sorted_quantile(std::span<const double> sorted, double level) {
  if (sorted.empty()) throw InvalidArgument("quantile of an empty sample");
  if (!(level >= 0.0) || level > 1.0) {
    throw InvalidArgument("quantile level outside [0, 1]");
  }
  const auto n = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil(level * n));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

double binomial_upper_bound(std::uint64_t successes, std::uint64_t trials,
                            double confidence) {
  if (trials == 0) throw InvalidArgument("binomial bound needs trials > 0");
  if (successes > trials) throw InvalidArgument("successes exceed trials");
  if (!(confidence > 0.0) || !(confidence < 1.0)) {
    throw InvalidArgument("confidence outside (0, 1)");
  }
  if (successes == trials) return 1.0;
  using boost::math::binomial_distribution;
  return binomial_distribution<>::find_upper_bound_on_p(
      static_cast<double>(trials), static_cast<double>(successes),
      1.0 - confidence);
}

double exceedance_tolerance(double delta, std::uint64_t n) {
  if (n == 0) throw InvalidArgument("exceedance tolerance needs n > 0");
  return delta + 3.0 * std::sqrt(delta * (1.0 - delta) / static_cast<double>(n));
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidArgument("slope inputs differ in length");
  if (x.size() < 2) throw InvalidArgument("slope needs at least two points");
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
      throw InvalidArgument("log-log slope needs positive values");
    }
    sx += std::log(x[i]);
    sy += std::log(y[i]);
  }
  const double n = static_cast<double>(x.size());
  const double mx = sx / n;
  const double my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(y[i]) - my);
  }
  if (sxx == 0.0) throw InvalidArgument("slope needs two distinct x values");
  return sxy / sxx;
}

std::vector<std::int64_t> log_grid(std::int64_t lo, std::int64_t hi,
                                   int count) {
  if (lo < 1 || hi < lo || count < 2) throw InvalidArgument("bad log grid");
  std::vector<std::int64_t> grid;
  const double a = std::log(static_cast<double>(lo));
  const double b = std::log(static_cast<double>(hi));
  for (int i = 0; i < count; ++i) {
    const double v = std::exp(a + (b - a) * i / (count - 1));
    const auto t = std::clamp<std::int64_t>(std::llround(v), lo, hi);
    if (grid.empty() || grid.back() != t) grid.push_back(t);
  }
  return grid;
}

}  // namespace plsgd
