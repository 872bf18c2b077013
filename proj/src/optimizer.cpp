#include "plsgd/optimizer.hpp"

#include <cmath>
#include <string>

#include "plsgd/errors.hpp"

namespace plsgd {

std::string_view to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::kTheta:
      return "theta";
    case ScheduleKind::kSlow:
      return "slow";
    case ScheduleKind::kStability:
      return "stability";
    case ScheduleKind::kConstant:
      return "constant";
  }
  return "unknown";
}

ScheduleKind schedule_kind_from_string(std::string_view name) {
  if (name == "theta") return ScheduleKind::kTheta;
  if (name == "slow") return ScheduleKind::kSlow;
  if (name == "stability") return ScheduleKind::kStability;
  if (name == "constant") return ScheduleKind::kConstant;
  throw InvalidArgument("unknown schedule kind '" + std::string(name) + "'");
}

StepSchedule StepSchedule::theta(double smoothness, double pl_constant) {
  if (!(smoothness > 0.0) || !(pl_constant > 0.0) ||
      pl_constant > smoothness) {
    throw InvalidArgument("theta schedule needs 0 < mu <= L");
  }
  StepSchedule s;
  s.kind_ = ScheduleKind::kTheta;
  s.smoothness_ = smoothness;
  s.pl_constant_ = pl_constant;
  s.tau_ = static_cast<std::int64_t>(std::floor(2.0 * smoothness / pl_constant));
  return s;
}

StepSchedule StepSchedule::slow(double c, double smoothness) {
  if (!(smoothness > 0.0)) throw InvalidArgument("slow schedule needs L > 0");
  if (!(c > 0.0) || !(c < 1.0 / smoothness)) {
    throw InvalidArgument("slow schedule needs 0 < c < 1/L (got c = " +
                          std::to_string(c) + ", 1/L = " +
                          std::to_string(1.0 / smoothness) + ")");
  }
  StepSchedule s;
  s.kind_ = ScheduleKind::kSlow;
  s.smoothness_ = smoothness;
  s.c_ = c;
  return s;
}

StepSchedule StepSchedule::stability(double c) {
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw InvalidArgument("stability schedule needs c > 0");
  }
  StepSchedule s;
  s.kind_ = ScheduleKind::kStability;
  s.c_ = c;
  return s;
}

StepSchedule StepSchedule::constant(double eta) {
  if (!(eta >= 0.0) || !std::isfinite(eta)) {
    throw InvalidArgument("constant schedule needs eta >= 0");
  }
  StepSchedule s;
  s.kind_ = ScheduleKind::kConstant;
  s.eta_ = eta;
  return s;
}

double StepSchedule::operator()(std::int64_t t) const {
  if (t < 0) throw InvalidArgument("schedule evaluated at negative t");
  const auto tt = static_cast<double>(t);
  switch (kind_) {
    case ScheduleKind::kTheta:
      if (t < tau_) return 1.0 / smoothness_;
      return (2.0 * tt + 1.0) / (pl_constant_ * (tt + 1.0) * (tt + 1.0));
    case ScheduleKind::kSlow:
      return 2.0 * c_ / (tt + 2.0);
    case ScheduleKind::kStability:
      return c_ / (tt + 1.0);
    case ScheduleKind::kConstant:
      return eta_;
  }
  return 0.0;
}

double StepSchedule::max_step() const {
  switch (kind_) {
    case ScheduleKind::kTheta:
      return 1.0 / smoothness_;
    case ScheduleKind::kSlow:
    case ScheduleKind::kStability:
      return c_;
    case ScheduleKind::kConstant:
      return eta_;
  }
  return 0.0;
}

Vector step(const Vector& x, double eta, const Vector& g) {
  if (x.size() != g.size()) throw InvalidArgument("dimension mismatch in step");
  if (!std::isfinite(eta) || eta < 0.0) {
    throw NumericError("step size must be finite and nonnegative");
  }
  if (!x.allFinite() || !g.allFinite()) throw NumericError("non-finite iterate or gradient");
  return x - eta * g;
}

Vector run_sgd_streaming(const Problem& p, const GradientOracle& oracle,
                         const StepSchedule& schedule, std::int64_t T,
                         std::uint32_t trial_id, const Vector& x0,
                         const StepObserver& observer) {
  if (T < 1) throw InvalidArgument("T must be >= 1");
  if (x0.size() != p.dimension()) throw InvalidArgument("x0 dimension mismatch");
  Vector x = x0;
  for (std::int64_t t = 0; t <= T; ++t) {
    TrajectoryRow row;
    const double value = p.value(x);
    row.gap = value - p.optimal_value();
    if (!std::isfinite(row.gap) || row.gap > kDivergenceGap) {
      throw DivergenceError(t, row.gap);
    }
    row.gap = p.gap(x);
    const GradientSample sample =
        sample_gradient(oracle, p, x, trial_id, static_cast<std::uint32_t>(t));
    row.grad_norm_sq = sample.true_gradient.squaredNorm();
    row.eta = schedule(t);
    row.radius = (x - x0).norm();
    row.inner = sample.true_gradient.dot(sample.error);
    row.err_norm_sq = sample.error.squaredNorm();
    if (observer) observer(t, row);
    if (t < T) x = step(x, row.eta, sample.gradient);
  }
  return x;
}

Trajectory run_sgd(const Problem& p, GradientOracle oracle,
                   const StepSchedule& schedule, std::int64_t T,
                   std::uint32_t trial_id, std::uint64_t seed,
                   const Vector& x0) {
  oracle.stream = seed;
  Trajectory trajectory;
  trajectory.trial_id = trial_id;
  trajectory.rows.reserve(static_cast<std::size_t>(T) + 1);
  trajectory.final_iterate =
      run_sgd_streaming(p, oracle, schedule, T, trial_id, x0,
                        [&](std::int64_t, const TrajectoryRow& row) {
                          trajectory.rows.push_back(row);
                        });
  return trajectory;
}

bool recursion_violated(const TrajectoryRow& now, double next_gap,
                        double smoothness, double pl_constant) {
  const double eta = now.eta;
  const double bound = (1.0 - pl_constant * eta) * now.gap +
                       eta * (1.0 - smoothness * eta) * now.inner +
                       0.5 * smoothness * eta * eta * now.err_norm_sq +
                       1e-9 * (1.0 + now.gap);
  return next_gap > bound;
}

std::vector<std::int64_t> recursion_check(const Trajectory& trajectory,
                                          const Problem& p,
                                          const StepSchedule& schedule) {
  if (!trajectory.instrumented) {
    throw InvalidArgument("trajectory lacks noise instrumentation");
  }
  const double smooth = p.smoothness();
  const double limit = (1.0 / smooth) * (1.0 + 1e-12);
  const auto& rows = trajectory.rows;
  for (std::size_t t = 0; t < rows.size(); ++t) {
    if (rows[t].eta > limit || schedule(static_cast<std::int64_t>(t)) > limit) {
      throw InvalidArgument("recursion check needs eta_t <= 1/L (violated at t=" +
                            std::to_string(t) + ")");
    }
  }
  std::vector<std::int64_t> violations;
  for (std::size_t t = 0; t + 1 < rows.size(); ++t) {
    if (recursion_violated(rows[t], rows[t + 1].gap, smooth, p.pl_constant())) {
      violations.push_back(static_cast<std::int64_t>(t));
    }
  }
  return violations;
}

// ---------------------------------------------------------------------------

namespace {

std::array<double, 2> project_to_ball(std::array<double, 2> p, double cx,
                                      double radius) {
  if (!std::isfinite(radius)) return p;
  const double dx = p[0] - cx;
  const double dy = p[1];
  const double dist = std::hypot(dx, dy);
  if (dist <= radius) return p;
  const double scale = radius / dist;
  return {cx + dx * scale, dy * scale};
}

}  // namespace

ProjectedRun run_projected_gd(const CounterexampleSpec& spec, double eta,
                              std::int64_t T) {
  return run_projected_gd(spec, eta, T, {spec.start_x, 0.0});
}

ProjectedRun run_projected_gd(const CounterexampleSpec& spec, double eta,
                              std::int64_t T, std::array<double, 2> start) {
  spec.validate();
  if (T < 1) throw InvalidArgument("T must be >= 1");
  if (!(eta > 0.0) || eta > 1.0 / (2.0 * spec.a)) {
    throw InvalidArgument("projected descent needs 0 < eta <= 1/(2a)");
  }
  ProjectedRun run;
  run.iterates.reserve(static_cast<std::size_t>(T) + 1);
  run.values.reserve(static_cast<std::size_t>(T) + 1);

  std::array<double, 2> point = project_to_ball(start, spec.start_x, spec.radius);
  MollifiedValue current = counterexample_eval(spec, point);
  run.iterates.push_back(point);
  run.values.push_back(current.value);
  for (std::int64_t t = 0; t < T; ++t) {
    const std::array<double, 2> trial{point[0] - eta * current.gradient[0],
                                      point[1] - eta * current.gradient[1]};
    const std::array<double, 2> next =
        project_to_ball(trial, spec.start_x, spec.radius);
    if (next == point) {
      // Deterministic map at a fixed point: the rest of the run repeats it.
      run.fixed_point_step = t + 1;
      run.iterates.resize(static_cast<std::size_t>(T) + 1, point);
      run.values.resize(static_cast<std::size_t>(T) + 1, current.value);
      break;
    }
    point = next;
    current = counterexample_eval(spec, point);
    run.iterates.push_back(point);
    run.values.push_back(current.value);
  }
  run.final_point = run.iterates.back();
  run.final_value = run.values.back();
  return run;
}

}  // namespace plsgd
