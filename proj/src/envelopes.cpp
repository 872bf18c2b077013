#include "plsgd/envelopes.hpp"

#include <cmath>
#include <algorithm>
#include <string>

#include "plsgd/errors.hpp"

namespace plsgd {

namespace {

void require_nonnegative(double v, const char* name) {
  if (!std::isfinite(v) || v < 0.0) {
    throw InvalidArgument(std::string(name) + " must be finite and >= 0");
  }
}

void require_positive(double v, const char* name) {
  if (!std::isfinite(v) || !(v > 0.0)) {
    throw InvalidArgument(std::string(name) + " must be finite and > 0");
  }
}

void require_probability(double delta) {
  if (!(delta > 0.0) || !(delta < 1.0)) {
    throw InvalidArgument("delta must lie in (0, 1)");
  }
}

// Extended precision: 1e4-step products and sums stay within 1e-12 relative.
using Wide = long double;

Wide envelope_next_wide(Wide k, Wide alpha, Wide beta_sq, Wide gamma) {
  const Wide lin = alpha * k + 2 * gamma;
  return (lin + std::sqrt(lin * lin + 4 * beta_sq * k)) / 2;
}

}  // namespace

double envelope_next(double k_t, double alpha, double beta_sq, double gamma) {
  require_nonnegative(k_t, "K_t");
  require_nonnegative(alpha, "alpha");
  require_nonnegative(beta_sq, "beta^2");
  require_nonnegative(gamma, "gamma");
  return static_cast<double>(envelope_next_wide(k_t, alpha, beta_sq, gamma));
}

void RecursionParams::validate() const {
  if (beta_sq.size() != alpha.size() || gamma.size() != alpha.size()) {
    throw InvalidArgument("recursion streams differ in length");
  }
  require_nonnegative(k0, "K_0");
  for (std::size_t t = 0; t < alpha.size(); ++t) {
    require_nonnegative(alpha[t], "alpha_t");
    require_nonnegative(beta_sq[t], "beta_t^2");
    require_nonnegative(gamma[t], "gamma_t");
  }
}

double expected_bound(const RecursionParams& params, double x0,
                      std::int64_t T) {
  params.validate();
  require_nonnegative(x0, "X_0");
  if (T < 0 || static_cast<std::size_t>(T) > params.size()) {
    throw InvalidArgument("horizon outside the recursion streams");
  }
  Wide e = x0;
  for (std::int64_t t = 0; t < T; ++t) {
    e = params.alpha[t] * e + params.gamma[t];
  }
  return static_cast<double>(e);
}

std::vector<double> expected_bound_sequence(const RecursionParams& params,
                                            double x0) {
  params.validate();
  require_nonnegative(x0, "X_0");
  std::vector<double> out;
  out.reserve(params.size() + 1);
  Wide e = x0;
  out.push_back(x0);
  for (std::size_t t = 0; t < params.size(); ++t) {
    e = params.alpha[t] * e + params.gamma[t];
    out.push_back(static_cast<double>(e));
  }
  return out;
}

std::vector<double> envelope_sequence(const RecursionParams& params) {
  params.validate();
  std::vector<double> out;
  out.reserve(params.size() + 1);
  Wide k = params.k0;
  out.push_back(params.k0);
  for (std::size_t t = 0; t < params.size(); ++t) {
    k = envelope_next_wide(k, params.alpha[t], params.beta_sq[t],
                           params.gamma[t]);
    out.push_back(static_cast<double>(k));
  }
  return out;
}

void SGDEnvelopeConfig::validate() const {
  require_positive(smoothness, "L");
  require_positive(pl_constant, "mu");
  if (pl_constant > smoothness * (1.0 + 1e-12)) {
    throw InvalidArgument("mu must not exceed L");
  }
  require_nonnegative(sigma, "sigma");
  if (batch < 1) throw InvalidArgument("b must be >= 1");
  if (dimension < 1) throw InvalidArgument("d must be >= 1");
  require_positive(c1, "C1");
  require_positive(c2, "C2");
  require_nonnegative(x0, "X_0");
}

RecursionParams sgd_recursion(const SGDEnvelopeConfig& cfg, std::int64_t T) {
  cfg.validate();
  if (T < 0) throw InvalidArgument("T must be >= 0");
  const double L = cfg.smoothness;
  const double s2 = cfg.sigma * cfg.sigma;
  const double b = cfg.batch;
  const double d = cfg.dimension;
  RecursionParams params;
  params.k0 = cfg.x0;
  params.alpha.reserve(static_cast<std::size_t>(T));
  params.beta_sq.reserve(static_cast<std::size_t>(T));
  params.gamma.reserve(static_cast<std::size_t>(T));
  for (std::int64_t t = 0; t < T; ++t) {
    const double eta = cfg.schedule(t);
    const double alpha = 1.0 - cfg.pl_constant * eta;
    if (alpha < 0.0) {
      throw InvalidArgument("step " + std::to_string(t) +
                            " has mu * eta > 1; the recursion needs eta <= 1/L");
    }
    const double shrink = 1.0 - L * eta;
    params.alpha.push_back(alpha);
    params.beta_sq.push_back(cfg.c1 * 2.0 * L * s2 * eta * eta * shrink *
                             shrink / (b * d));
    params.gamma.push_back(cfg.c2 * L * s2 * eta * eta / (2.0 * b));
  }
  return params;
}

double theta_closed_form(const SGDEnvelopeConfig& cfg, std::int64_t t) {
  cfg.validate();
  if (cfg.schedule.kind() != ScheduleKind::kTheta) {
    throw InvalidArgument("theta closed form needs the theta schedule");
  }
  if (t < 0) throw InvalidArgument("t must be >= 0");
  const double L = cfg.smoothness;
  const double mu = cfg.pl_constant;
  const double s2 = cfg.sigma * cfg.sigma;
  const double b = cfg.batch;
  const double d = cfg.dimension;
  const std::int64_t tau = cfg.schedule.tau();
  auto burn_in = [&](std::int64_t s) {
    return std::pow(1.0 - mu / L, static_cast<double>(s)) * cfg.x0 +
           cfg.c2 * s2 / (mu * b);
  };
  if (t <= tau) return burn_in(t);
  const double tt = static_cast<double>(t);
  const double ta = static_cast<double>(tau);
  return burn_in(tau) * ta * ta / (tt * tt) +
         (18.0 * cfg.c1 + 4.0 * cfg.c2 * d) * L * s2 * (tt - ta) /
             (b * d * mu * mu * tt * tt);
}

double slow_closed_form(const SGDEnvelopeConfig& cfg, std::int64_t t) {
  cfg.validate();
  if (cfg.schedule.kind() != ScheduleKind::kSlow) {
    throw InvalidArgument("slow closed form needs the slow schedule");
  }
  if (t < 0) throw InvalidArgument("t must be >= 0");
  const double c = cfg.schedule.c();
  const double mc = cfg.pl_constant * c;
  if (!(mc < 1.0)) throw InvalidArgument("slow closed form needs mu c < 1");
  const double scale = (16.0 * cfg.c1 + 4.0 * cfg.c2 * cfg.dimension) *
                       cfg.smoothness * cfg.sigma * cfg.sigma * c * c /
                       (static_cast<double>(cfg.batch) * cfg.dimension);
  Wide sum = 0;
  for (std::int64_t i = 0; i < t; ++i) {
    sum += std::pow(static_cast<Wide>(i + 2), -(2.0L - mc));
  }
  return static_cast<double>((cfg.x0 + scale * sum) /
                             std::pow(static_cast<Wide>(t + 1), mc));
}

double confidence_factor(double delta) { return 1.0 - std::log(delta); }

BoundReport sgd_envelope(const SGDEnvelopeConfig& cfg, std::int64_t T,
                         const std::vector<double>& deltas) {
  for (double delta : deltas) {
    if (!(delta > 0.0) || !(delta < std::exp(-1.0))) {
      throw InvalidArgument("delta " + std::to_string(delta) +
                            " outside (0, 1/e)");
    }
  }
  const RecursionParams params = sgd_recursion(cfg, T);
  BoundReport report;
  report.deltas = deltas;
  report.k = envelope_sequence(params);
  report.expected = expected_bound_sequence(params, cfg.x0);
  for (double delta : deltas) {
    const double factor = confidence_factor(delta);
    std::vector<double> env(report.k.size());
    for (std::size_t t = 0; t < env.size(); ++t) env[t] = report.k[t] * factor;
    report.envelopes.push_back(std::move(env));
  }
  const auto kind = cfg.schedule.kind();
  if (kind == ScheduleKind::kTheta || kind == ScheduleKind::kSlow) {
    std::vector<double> closed(report.k.size());
    if (kind == ScheduleKind::kTheta) {
      for (std::size_t t = 0; t < closed.size(); ++t) {
        closed[t] = theta_closed_form(cfg, static_cast<std::int64_t>(t));
      }
    } else if (cfg.pl_constant * cfg.schedule.c() < 1.0) {
      // Running sum instead of calling slow_closed_form per t.
      const double c = cfg.schedule.c();
      const double mc = cfg.pl_constant * c;
      const double scale = (16.0 * cfg.c1 + 4.0 * cfg.c2 * cfg.dimension) *
                           cfg.smoothness * cfg.sigma * cfg.sigma * c * c /
                           (static_cast<double>(cfg.batch) * cfg.dimension);
      Wide sum = 0;
      for (std::size_t t = 0; t < closed.size(); ++t) {
        closed[t] = static_cast<double>((cfg.x0 + scale * sum) /
                                        std::pow(static_cast<Wide>(t + 1), mc));
        sum += std::pow(static_cast<Wide>(t + 2), -(2.0L - mc));
      }
    } else {
      return report;
    }
    report.closed_form = std::move(closed);
  }
  return report;
}

double stability_bound(double rho, std::int64_t T, double smoothness, double c,
                       std::uint32_t b, std::int64_t n) {
  if (n <= 0) throw InvalidArgument("n must be > 0");
  require_nonnegative(rho, "rho");
  require_positive(smoothness, "L");
  require_positive(c, "c");
  if (T < 1) throw InvalidArgument("T must be >= 1");
  if (b < 1) throw InvalidArgument("b must be >= 1");
  return 2.0 * rho * rho *
         std::pow(static_cast<double>(T), smoothness * c) *
         (c + 1.0 / smoothness) * b / static_cast<double>(n);
}

double generalization_bound(double loss_bound, double rho, std::int64_t T,
                            double smoothness, double c, std::uint32_t b,
                            std::int64_t n, double delta) {
  require_probability(delta);
  require_nonnegative(loss_bound, "M");
  if (n <= 0) throw InvalidArgument("n must be > 0");
  const double core = rho * rho *
                      std::pow(static_cast<double>(T), smoothness * c) *
                      (c + 1.0 / smoothness) * b;
  (void)stability_bound(rho, T, smoothness, c, b, n);  // argument checks
  return std::sqrt((12.0 * loss_bound * core + loss_bound * loss_bound) /
                   (2.0 * static_cast<double>(n) * delta));
}

double elisseeff_bound(double loss_bound, std::int64_t n, double alpha,
                       double delta) {
  require_probability(delta);
  require_nonnegative(loss_bound, "M");
  require_nonnegative(alpha, "alpha");
  if (n <= 0) throw InvalidArgument("n must be > 0");
  const double nn = static_cast<double>(n);
  return std::sqrt((6.0 * loss_bound * nn * alpha + loss_bound * loss_bound) /
                   (2.0 * nn * delta));
}

Horizon hprisk_horizon(double smoothness, int d, double sigma,
                       double loss_bound, double rho, double pl_constant,
                       std::uint32_t b, std::int64_t n) {
  require_positive(smoothness, "L");
  require_positive(sigma, "sigma");
  require_positive(loss_bound, "M");
  require_positive(rho, "rho");
  require_positive(pl_constant, "mu");
  if (d < 1) throw InvalidArgument("d must be >= 1");
  if (b < 1) throw InvalidArgument("b must be >= 1");
  if (n < 1) throw InvalidArgument("n must be >= 1");
  const double sum = pl_constant + smoothness;
  const double bb = b;
  const double dd = d;
  Horizon h;
  h.c = 1.0 / sum;
  h.raw = smoothness * smoothness * dd * dd * std::pow(sigma, 4) /
          (loss_bound * rho * rho * std::pow(sum, 4) * bb * bb) *
          static_cast<double>(n) / bb;
  h.T = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(h.raw)));
  return h;
}

}  // namespace plsgd
