#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "plsgd/optimizer.hpp"

namespace plsgd {

/// Smallest K >= 0 with K^2 >= (alpha K_t + 2 gamma) K + beta_sq K_t.
/// Throws InvalidArgument on negative or non-finite input.
double envelope_next(double k_t, double alpha, double beta_sq, double gamma);

/// Coefficient streams of X_{t+1} <= alpha_t X_t + w_t + v_t, where w_t is
/// sqrt(beta_t^2 X_t)-sub-gaussian and v_t is gamma_t-sub-exponential.
struct RecursionParams {
  std::vector<double> alpha;
  std::vector<double> beta_sq;
  std::vector<double> gamma;
  double k0 = 0.0;

  std::size_t size() const { return alpha.size(); }
  /// Throws InvalidArgument unless the streams have equal length and every
  /// entry (and k0) is finite and nonnegative.
  void validate() const;
};

/// (prod alpha) X0 + sum_t (prod_{i>t} alpha_i) gamma_t over the first T
/// steps. T = 0 gives X0.
double expected_bound(const RecursionParams& params, double x0, std::int64_t T);

/// expected_bound for every horizon 0..params.size().
std::vector<double> expected_bound_sequence(const RecursionParams& params,
                                            double x0);

/// K_0 = params.k0, then envelope_next through every step.
std::vector<double> envelope_sequence(const RecursionParams& params);

struct SGDEnvelopeConfig {
  double smoothness = 1.0;
  double pl_constant = 1.0;
  double sigma = 0.0;
  std::uint32_t batch = 1;
  int dimension = 1;
  double c1 = 2.0;
  double c2 = 2.0;
  StepSchedule schedule = StepSchedule::constant(0.0);
  double x0 = 0.0;  ///< f(x_0) - f_star; also K_0

  void validate() const;
};

/// alpha_t = 1 - mu eta_t, beta_t^2 = 2 C1 L sigma^2 eta_t^2 (1 - L eta_t)^2 / (b d),
/// gamma_t = C2 L sigma^2 eta_t^2 / (2 b), for t < T.
RecursionParams sgd_recursion(const SGDEnvelopeConfig& cfg, std::int64_t T);

/// Closed-form envelope for the theta schedule at step t.
double theta_closed_form(const SGDEnvelopeConfig& cfg, std::int64_t t);

/// Closed-form envelope for the slow schedule at step t (mu c < 1).
double slow_closed_form(const SGDEnvelopeConfig& cfg, std::int64_t t);

/// log(e / delta); the high-probability multiplier.
double confidence_factor(double delta);

struct BoundReport {
  std::vector<double> deltas;
  std::vector<double> k;                       ///< K_t, t = 0..T
  std::vector<std::vector<double>> envelopes;  ///< [delta][t] = K_t log(e/delta)
  std::vector<double> expected;                ///< expected_bound at every t
  /// Closed form where one exists (theta, slow); empty otherwise.
  std::optional<std::vector<double>> closed_form;
};

/// Throws InvalidArgument for any delta outside (0, 1/e).
BoundReport sgd_envelope(const SGDEnvelopeConfig& cfg, std::int64_t T,
                         const std::vector<double>& deltas);

/// 2 rho^2 T^{Lc} (c + 1/L) b / n
double stability_bound(double rho, std::int64_t T, double smoothness, double c,
                       std::uint32_t b, std::int64_t n);

/// sqrt((12 M rho^2 T^{Lc} (c + 1/L) b + M^2) / (2 n delta))
double generalization_bound(double loss_bound, double rho, std::int64_t T,
                            double smoothness, double c, std::uint32_t b,
                            std::int64_t n, double delta);

/// sqrt((6 M n alpha + M^2) / (2 n delta))
double elisseeff_bound(double loss_bound, std::int64_t n, double alpha,
                       double delta);

struct Horizon {
  std::int64_t T = 1;
  double c = 0.0;    ///< 1 / (mu + L)
  double raw = 0.0;  ///< the expression before ceiling
};

/// T = ceil(L^2 d^2 sigma^4 / (M rho^2 (mu + L)^4 b^2) * n / b), at least 1.
Horizon hprisk_horizon(double smoothness, int d, double sigma,
                       double loss_bound, double rho, double pl_constant,
                       std::uint32_t b, std::int64_t n);

}  // namespace plsgd
