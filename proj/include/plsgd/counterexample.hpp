#pragma once

#include <array>
#include <limits>
#include <span>
#include <vector>

namespace plsgd {

/// Gauss-Legendre rule on [-1, 1]. Rules are computed once per order and
/// cached for the life of the process.
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const GaussLegendreRule& gauss_legendre(int order);

/// Two-dimensional nonconvex landscape
///   f(x, y) = ( a (x)_+^2 - b (|y| - c)_+ )_+
/// smoothed by a bump kernel of radius epsilon, together with the feasible
/// ball of radius `radius` about (start_x, 0).
struct CounterexampleSpec {
  double a = 1.0;
  double b = 1.0;
  double c = 1.0;
  double start_x = 2.0;
  double epsilon = 0.25;
  /// Initial Gauss-Legendre nodes per panel; doubled until values agree.
  int order = 16;
  double radius = std::numeric_limits<double>::infinity();

  /// Throws InvalidArgument when the invariants (eps < c, order >= 8, ...) fail.
  void validate() const;
};

/// Defaults a = b = c = 1, start (2, 0), epsilon = 0.25, and the feasible
/// radius set to the distance from the start to the minimizer set minus 1e-6.
CounterexampleSpec default_counterexample();

/// Unsmoothed f(x, y).
double counterexample_raw(const CounterexampleSpec& spec, double x, double y);

/// Distance from (start_x, 0) to the zero set {x <= 0 or |y| >= (a/b) x^2 + c},
/// found by solving the stationarity cubic of the parabola branch.
double distance_to_minimizers(const CounterexampleSpec& spec);

struct MollifiedValue {
  double value = 0.0;
  std::array<double, 2> gradient{0.0, 0.0};
  /// Quadrature order that produced the result.
  int order = 0;
};

/// Value and gradient of the mollified function at `point`, with automatic
/// order doubling until consecutive orders agree to 1e-6 in value.
MollifiedValue counterexample_eval(const CounterexampleSpec& spec,
                                   std::array<double, 2> point);

/// Same, at a fixed quadrature order (no convergence check).
MollifiedValue counterexample_eval_fixed(const CounterexampleSpec& spec,
                                         std::array<double, 2> point,
                                         int order);

}  // namespace plsgd
