#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

#include "plsgd/counterexample.hpp"
#include "plsgd/oracles.hpp"
#include "plsgd/problems.hpp"
#include "plsgd/types.hpp"

namespace plsgd {

enum class ScheduleKind { kTheta, kSlow, kStability, kConstant };

std::string_view to_string(ScheduleKind kind);
ScheduleKind schedule_kind_from_string(std::string_view name);

/// Step-size sequence eta_t.
///   theta:     1/L for t < tau = floor(2L/mu), then (2t+1) / (mu (t+1)^2)
///   slow:      2c / (t+2), with c < 1/L enforced at construction
///   stability: c / (t+1)
///   constant:  eta
class StepSchedule {
 public:
  static StepSchedule theta(double smoothness, double pl_constant);
  static StepSchedule slow(double c, double smoothness);
  static StepSchedule stability(double c);
  static StepSchedule constant(double eta);

  double operator()(std::int64_t t) const;

  ScheduleKind kind() const { return kind_; }
  /// Burn-in length tau for theta, 0 otherwise.
  std::int64_t tau() const { return tau_; }
  double c() const { return c_; }
  double eta() const { return eta_; }
  double smoothness() const { return smoothness_; }
  double pl_constant() const { return pl_constant_; }
  /// Largest step over the whole schedule.
  double max_step() const;

 private:
  StepSchedule() = default;

  ScheduleKind kind_ = ScheduleKind::kConstant;
  double smoothness_ = 0.0;
  double pl_constant_ = 0.0;
  double c_ = 0.0;
  double eta_ = 0.0;
  std::int64_t tau_ = 0;
};

/// x - eta g. Throws NumericError on non-finite input or negative eta.
Vector step(const Vector& x, double eta, const Vector& g);

/// One recorded SGD step. `inner` and `err_norm_sq` describe the noise e_t
/// drawn at x_t, i.e. the noise that produced x_{t+1}.
struct TrajectoryRow {
  double gap = 0.0;
  double grad_norm_sq = 0.0;
  double eta = 0.0;
  double radius = 0.0;
  double inner = 0.0;
  double err_norm_sq = 0.0;
};

struct Trajectory {
  std::uint32_t trial_id = 0;
  std::vector<TrajectoryRow> rows;  ///< length T + 1
  Vector final_iterate;
  /// False when the noise columns were not recorded (e.g. loaded from a
  /// summary); recursion_check refuses such trajectories.
  bool instrumented = true;
};

/// Receives each row as soon as it is complete, in increasing t.
using StepObserver = std::function<void(std::int64_t t, const TrajectoryRow&)>;

/// Divergence threshold on the optimality gap.
inline constexpr double kDivergenceGap = 1e12;

/// Runs T steps of SGD from x0 and streams rows to `observer`. Pure function
/// of its inputs. Throws DivergenceError when the gap exceeds 1e12.
Vector run_sgd_streaming(const Problem& p, const GradientOracle& oracle,
                         const StepSchedule& schedule, std::int64_t T,
                         std::uint32_t trial_id, const Vector& x0,
                         const StepObserver& observer);

/// Runs SGD and records the full trajectory. `seed` overrides oracle.stream.
Trajectory run_sgd(const Problem& p, GradientOracle oracle,
                   const StepSchedule& schedule, std::int64_t T,
                   std::uint32_t trial_id, std::uint64_t seed,
                   const Vector& x0);

/// True when X_{t+1} breaks the one-step descent inequality
///   X_{t+1} <= (1 - mu eta) X_t + eta (1 - L eta) <grad f, e>
///              + (L eta^2 / 2) |e|^2 + 1e-9 (1 + X_t).
bool recursion_violated(const TrajectoryRow& now, double next_gap,
                        double smoothness, double pl_constant);

/// Steps t at which the descent inequality fails. Throws InvalidArgument if
/// any eta_t > 1/L, and when the trajectory carries no noise instrumentation.
std::vector<std::int64_t> recursion_check(const Trajectory& trajectory,
                                          const Problem& p,
                                          const StepSchedule& schedule);

struct ProjectedRun {
  std::vector<std::array<double, 2>> iterates;  ///< length T + 1
  std::vector<double> values;                    ///< f_eps at each iterate
  std::array<double, 2> final_point{};
  double final_value = 0.0;
  /// First step whose iterate repeated exactly; remaining entries are copies.
  std::int64_t fixed_point_step = -1;
};

/// Projected gradient descent on the mollified counterexample over the ball
/// of radius spec.radius about (spec.start_x, 0), from (spec.start_x, 0).
/// An infinite radius runs the unconstrained method.
ProjectedRun run_projected_gd(const CounterexampleSpec& spec, double eta,
                              std::int64_t T);

/// Same, from an explicit starting point.
ProjectedRun run_projected_gd(const CounterexampleSpec& spec, double eta,
                              std::int64_t T, std::array<double, 2> start);

}  // namespace plsgd
