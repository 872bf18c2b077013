#pragma once

#include <span>

namespace plsgd {

/// Empirical Orlicz norms. Both are the smallest sigma (bisection to 1e-6
/// relative) with mean(exp(psi(X_i) / sigma^k)) <= e, bracketed on
/// [1e-12, 10 max|X_i|]. The search runs on samples normalized by max|X_i|,
/// so the estimate is homogeneous in the sample scale. All-zero input gives 0.
/// At least 100 samples are required.

/// Sub-gaussian norm: psi = X^2, k = 2.
double subgaussian_norm_estimate(std::span<const double> samples);

/// Sub-exponential norm: psi = |X|, k = 1.
double subexponential_norm_estimate(std::span<const double> samples);

}  // namespace plsgd
