#include "plsgd/counterexample.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "plsgd/errors.hpp"

namespace plsgd {

namespace {

constexpr double kAgreement = 1e-6;
constexpr int kMaxOrder = 512;

GaussLegendreRule compute_rule(int order) {
  GaussLegendreRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  const int half = (order + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Tricomi initial guess, then Newton on P_n.
    double z = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = z;
      for (int k = 2; k <= order; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (order == 1) p0 = 1.0;
      dp = order * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // Recompute the derivative at the converged node for the weight.
    double p0 = 1.0;
    double p1 = z;
    for (int k = 2; k <= order; ++k) {
      const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = order * (z * p1 - p0) / (z * z - 1.0);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.nodes[i] = -z;
    rule.nodes[order - 1 - i] = z;
    rule.weights[i] = w;
    rule.weights[order - 1 - i] = w;
  }
  return rule;
}

double positive_part(double v) { return v > 0.0 ? v : 0.0; }

struct Accumulator {
  double value = 0.0;
  double grad_u = 0.0;
  double grad_v = 0.0;
  double mass = 0.0;
};

// Breakpoints of the integrand along a line, restricted to (lo, hi).
std::vector<double> panel_edges(double lo, double hi,
                                std::initializer_list<double> kinks) {
  std::vector<double> edges{lo};
  for (double k : kinks) {
    if (k > lo && k < hi) edges.push_back(k);
  }
  edges.push_back(hi);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

MollifiedValue integrate(const CounterexampleSpec& spec, double x, double y,
                         int order) {
  const GaussLegendreRule& rule = gauss_legendre(order);
  const double eps = spec.epsilon;
  Accumulator acc;

  const auto outer = panel_edges(-1.0, 1.0, {x / eps});
  for (std::size_t po = 0; po + 1 < outer.size(); ++po) {
    const double u_mid = 0.5 * (outer[po] + outer[po + 1]);
    const double u_half = 0.5 * (outer[po + 1] - outer[po]);
    for (int i = 0; i < order; ++i) {
      const double u = u_mid + u_half * rule.nodes[i];
      const double wu = u_half * rule.weights[i];
      const double chord_sq = 1.0 - u * u;
      if (chord_sq <= 0.0) continue;
      const double chord = std::sqrt(chord_sq);
      const double s = positive_part(x - eps * u);
      const double bowl = spec.a * s * s;
      const double lift = spec.c + bowl / spec.b;
      const auto inner = panel_edges(
          -chord, chord,
          {(y - spec.c) / eps, (y + spec.c) / eps, (y - lift) / eps,
           (y + lift) / eps, y / eps});
      for (std::size_t pi = 0; pi + 1 < inner.size(); ++pi) {
        const double v_mid = 0.5 * (inner[pi] + inner[pi + 1]);
        const double v_half = 0.5 * (inner[pi + 1] - inner[pi]);
        for (int j = 0; j < order; ++j) {
          const double v = v_mid + v_half * rule.nodes[j];
          const double room = chord_sq - v * v;
          if (room <= 0.0) continue;
          const double w = wu * v_half * rule.weights[j];
          const double bump = std::exp(-1.0 / room);
          acc.mass += w * bump;
          if (bump == 0.0 || bowl == 0.0) continue;
          const double f = positive_part(
              bowl - spec.b * positive_part(std::abs(y - eps * v) - spec.c));
          if (f == 0.0) continue;
          const double shape = -2.0 / (room * room);
          acc.value += w * f * bump;
          acc.grad_u += w * f * bump * shape * u;
          acc.grad_v += w * f * bump * shape * v;
        }
      }
    }
  }
  MollifiedValue out;
  out.order = order;
  out.value = acc.value / acc.mass;
  out.gradient = {acc.grad_u / (eps * acc.mass), acc.grad_v / (eps * acc.mass)};
  return out;
}

}  // namespace

const GaussLegendreRule& gauss_legendre(int order) {
  if (order < 1) throw InvalidArgument("quadrature order must be positive");
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<GaussLegendreRule>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[order];
  if (!slot) slot = std::make_unique<GaussLegendreRule>(compute_rule(order));
  return *slot;
}

void CounterexampleSpec::validate() const {
  if (!(a > 0.0) || !(b > 0.0)) throw InvalidArgument("a and b must be > 0");
  if (!(c >= 0.0)) throw InvalidArgument("c must be >= 0");
  if (!(start_x > 0.0)) throw InvalidArgument("start point d0 must be > 0");
  if (!(epsilon > 0.0) || !(epsilon < c)) {
    throw InvalidArgument("mollification radius must lie in (0, c)");
  }
  if (order < 8) throw InvalidArgument("quadrature order must be >= 8");
  if (!(radius > 0.0)) throw InvalidArgument("feasible radius must be > 0");
}

CounterexampleSpec default_counterexample() {
  CounterexampleSpec spec;
  spec.radius = distance_to_minimizers(spec) - 1e-6;
  return spec;
}

double counterexample_raw(const CounterexampleSpec& spec, double x, double y) {
  const double s = positive_part(x);
  return positive_part(spec.a * s * s -
                       spec.b * positive_part(std::abs(y) - spec.c));
}

double distance_to_minimizers(const CounterexampleSpec& spec) {
  const double d0 = spec.start_x;
  if (d0 <= 0.0) return 0.0;
  const double k = spec.a / spec.b;
  // D(x) = (x - d0)^2 + (k x^2 + c)^2 is strictly convex on [0, d0]; bisect
  // on D'(x) = 2 (x - d0) + 4 k x (k x^2 + c).
  auto slope = [&](double x) {
    return 2.0 * (x - d0) + 4.0 * k * x * (k * x * x + spec.c);
  };
  double lo = 0.0;
  double hi = d0;
  for (int iter = 0; iter < 200 && hi - lo > 0.0; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (slope(mid) < 0.0 ? lo : hi) = mid;
  }
  const double x = 0.5 * (lo + hi);
  const double curve = std::hypot(x - d0, k * x * x + spec.c);
  return std::min(d0, curve);
}

MollifiedValue counterexample_eval_fixed(const CounterexampleSpec& spec,
                                         std::array<double, 2> point,
                                         int order) {
  spec.validate();
  if (!std::isfinite(point[0]) || !std::isfinite(point[1])) {
    throw NumericError("non-finite evaluation point");
  }
  // The kernel support lies in {x <= 0}, where f vanishes identically.
  if (point[0] + spec.epsilon <= 0.0) return MollifiedValue{0.0, {0.0, 0.0}, 0};
  return integrate(spec, point[0], point[1], order);
}

MollifiedValue counterexample_eval(const CounterexampleSpec& spec,
                                   std::array<double, 2> point) {
  spec.validate();
  if (!std::isfinite(point[0]) || !std::isfinite(point[1])) {
    throw NumericError("non-finite evaluation point");
  }
  if (point[0] + spec.epsilon <= 0.0) return MollifiedValue{0.0, {0.0, 0.0}, 0};
  int order = spec.order;
  MollifiedValue coarse = integrate(spec, point[0], point[1], order);
  while (2 * order <= kMaxOrder) {
    order *= 2;
    MollifiedValue fine = integrate(spec, point[0], point[1], order);
    const bool value_ok = std::abs(fine.value - coarse.value) <= kAgreement;
    // The gradient drives the iterates, so keep refining while it still moves,
    // but only the value decides convergence.
    const bool grad_ok =
        std::abs(fine.gradient[0] - coarse.gradient[0]) <= kAgreement &&
        std::abs(fine.gradient[1] - coarse.gradient[1]) <= kAgreement;
    if (value_ok && (grad_ok || 2 * order > kMaxOrder)) return fine;
    coarse = fine;
  }
  throw AccuracyError("mollifier quadrature did not reach 1e-6 agreement by order " +
                      std::to_string(kMaxOrder));
}

}  // namespace plsgd
