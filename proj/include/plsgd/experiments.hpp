#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "plsgd/counterexample.hpp"
#include "plsgd/envelopes.hpp"
#include "plsgd/optimizer.hpp"
#include "plsgd/problems.hpp"

namespace plsgd {

/// Default start: the reference point shifted by `distance` along the
/// all-ones direction when the problem has a closed-form minimizer set
/// (quadratics), the reference point itself otherwise (logistic: origin).
Vector default_start(const Problem& p, double distance = 1.0);

/// {10, 100, 1000, 10000} within [0, T]; {T} when none fall inside.
std::vector<std::int64_t> default_checkpoints(std::int64_t T);

struct EnsembleOptions {
  std::vector<double> deltas{0.1, 0.05, 0.01};
  double c1 = 2.0;
  double c2 = 2.0;
  std::vector<std::int64_t> checkpoints;  ///< empty: default_checkpoints(T)
  std::optional<Vector> x0;               ///< empty: default_start(p)
  unsigned threads = 0;
  /// Trajectories of trials [0, keep_trajectories) retained for output.
  std::size_t keep_trajectories = 0;
};

struct CheckpointStats {
  std::int64_t t = 0;
  double mean = 0.0;
  double sd = 0.0;  ///< sample standard deviation of the gap
  double q50 = 0.0, q90 = 0.0, q95 = 0.0, q99 = 0.0;
  double k = 0.0;
  std::vector<double> envelope;          ///< per delta
  std::vector<std::uint64_t> exceed;     ///< per delta, count of X_t > envelope
  std::vector<double> exceed_upper;      ///< per delta, 99% upper bound on the rate
  double mgf_stat = 0.0;                 ///< mean exp(X_t / K_t)
  double expected_bound = 0.0;
};

struct EnsembleStats {
  std::uint64_t trials = 0;  ///< completed (non-diverged) trials
  std::int64_t T = 0;
  std::int64_t tau = 0;
  std::vector<double> deltas;
  std::vector<double> mean_gap;  ///< t = 0..T
  std::vector<CheckpointStats> checkpoints;
  /// Present when every step is at most 1/L, so the recursion applies.
  std::optional<BoundReport> bounds;
  bool recursion_checked = false;
  std::uint64_t recursion_violations = 0;
  double max_radius = 0.0;
  std::vector<Trajectory> kept;
  std::vector<std::pair<std::uint32_t, std::int64_t>> diverged;  ///< (trial, step)
};

/// N independent SGD trials (trial ids 0..N-1, stream `seed`). Results do not
/// depend on the thread count. N >= 100.
EnsembleStats run_ensemble(const Problem& p, const GradientOracle& oracle,
                           const StepSchedule& schedule, std::int64_t T,
                           std::uint64_t N, std::uint64_t seed,
                           const EnsembleOptions& options = {});

/// Least-squares slope of log(mean gap) on log(t) over a log-spaced grid in
/// [t_lo, t_hi]. Requires t_hi >= 2 t_lo >= 2 tau.
double rate_fit(const EnsembleStats& stats, std::int64_t t_lo,
                std::int64_t t_hi);

struct CoupledStats {
  std::uint64_t replicates = 0;
  std::int64_t T = 0;
  std::size_t n = 0;
  std::uint32_t batch = 1;
  std::size_t i_star = 0;
  double smoothness = 0.0;
  double rho = 0.0;
  double c = 0.0;
  std::vector<double> delta_mean;            ///< t = 0..T
  std::vector<double> delta_max;             ///< t = 0..T
  std::vector<std::uint64_t> violations;     ///< t = 0..T (last entry 0)
  std::uint64_t hits = 0;                    ///< steps whose batch held i_star
  double hit_rate = 0.0;
  /// Per replicate: max over the surrogate sample set of |l(x_T,s) - l(x'_T,s)|.
  std::vector<double> sup_deviation;
  double mean_sup_deviation = 0.0;
  double stability_bound = 0.0;
  std::uint64_t total_violations() const;
};

/// Coupled SGD on two logistic datasets that differ only at `i_star`, with
/// shared minibatch streams. The sup-loss surrogate ranges over both datasets
/// plus `fresh`. The schedule must be the stability kind.
CoupledStats run_coupled(const LogisticProblem& base,
                         const LogisticProblem& neighbor, std::size_t i_star,
                         const LogisticData& fresh, std::uint32_t batch,
                         const StepSchedule& schedule, std::int64_t T,
                         std::uint64_t replicates, std::uint64_t seed,
                         unsigned threads = 0);

struct RiskSpec {
  int dimension = 5;
  std::uint64_t data_seed = 1;
  double lambda_r = 0.1;
  std::int64_t n = 100;
  std::uint32_t batch = 1;
  /// Declared oracle noise level used by the horizon and convergence bound.
  double sigma = 1.0;
  std::vector<double> multipliers{0.0, 0.25, 1.0, 4.0};
  std::uint64_t replicates = 200;
  double delta = 0.1;
  std::size_t heldout = 100000;
  std::int64_t max_T = 200000;
  int pilot_points = 2000;
  std::uint64_t seed = 1;
  double c1 = 2.0;
  double c2 = 2.0;
  unsigned threads = 0;
};

struct RiskReport {
  double multiplier = 0.0;
  std::int64_t T = 1;
  double c = 0.0;
  double F_est = 0.0;    ///< mean held-out risk at x_T
  double f_est = 0.0;    ///< mean empirical risk at x_T
  double gap = 0.0;      ///< F_est - f_est
  double excess = 0.0;   ///< mean F(x_T) - f_star over replicates
  double conv_bound = 0.0;
  double gen_bound = 0.0;
  double combined_bound = 0.0;
  std::uint64_t replicates = 0;
  std::uint64_t exceed_count = 0;  ///< replicates with F - f > gen_bound
  double exceed_frac = 0.0;
};

/// One report per multiplier; T = clamp(ceil(m * raw horizon), 1, max_T).
std::vector<RiskReport> run_risk_balance(const RiskSpec& spec);

struct CounterexampleReport {
  CounterexampleSpec spec;
  double eta = 0.0;
  std::int64_t T = 0;
  double unconstrained_value = 0.0;
  std::array<double, 2> unconstrained_point{};
  double projected_value = 0.0;
  std::array<double, 2> projected_point{};
  std::array<double, 2> expected_stall{};
  double stall_distance = 0.0;
  bool reaches_minimum = false;  ///< unconstrained value <= 1e-6
  bool stalls = false;           ///< projected value >= 1e-3
  bool stall_matches = false;    ///< stall within 1e-3 of (d0 - r, 0)
  ProjectedRun projected;
};

/// Runs unconstrained and projected descent on the mollified counterexample.
/// spec.radius must be finite.
CounterexampleReport run_counterexample_demo(const CounterexampleSpec& spec,
                                             double eta, std::int64_t T);

}  // namespace plsgd
