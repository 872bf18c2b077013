#include "plsgd/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "plsgd/errors.hpp"
#include "plsgd/oracles.hpp"
#include "plsgd/parallel.hpp"
#include "plsgd/statistics.hpp"

namespace plsgd {

namespace {

// Trials per reduction block. Fixed so sums never depend on the thread count.
constexpr std::uint64_t kBlock = 32;

std::uint64_t block_count(std::uint64_t n) { return (n + kBlock - 1) / kBlock; }

}  // namespace

Vector default_start(const Problem& p, double distance) {
  Vector ref = p.reference_point();
  if (!p.project_to_minimizers(ref)) return ref;
  const double step = distance / std::sqrt(static_cast<double>(p.dimension()));
  return ref + Vector::Constant(p.dimension(), step);
}

std::vector<std::int64_t> default_checkpoints(std::int64_t T) {
  std::vector<std::int64_t> out;
  for (std::int64_t t : {10, 100, 1000, 10000}) {
    if (t <= T) out.push_back(t);
  }
  if (out.empty()) out.push_back(T);
  return out;
}

// ---------------------------------------------------------------------------
// Ensembles

EnsembleStats run_ensemble(const Problem& p, const GradientOracle& oracle,
                           const StepSchedule& schedule, std::int64_t T,
                           std::uint64_t N, std::uint64_t seed,
                           const EnsembleOptions& options) {
  if (N < 100) throw InvalidArgument("ensembles need N >= 100 trials");
  if (T < 1) throw InvalidArgument("T must be >= 1");
  if (N > std::numeric_limits<std::uint32_t>::max()) {
    throw InvalidArgument("trial count exceeds the 32-bit trial lane");
  }
  const Vector x0 = options.x0 ? *options.x0 : default_start(p);
  if (x0.size() != p.dimension()) throw InvalidArgument("x0 dimension mismatch");
  std::vector<std::int64_t> checkpoints =
      options.checkpoints.empty() ? default_checkpoints(T) : options.checkpoints;
  std::sort(checkpoints.begin(), checkpoints.end());
  checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()),
                    checkpoints.end());
  for (auto t : checkpoints) {
    if (t < 0 || t > T) throw InvalidArgument("checkpoint outside [0, T]");
  }

  EnsembleStats stats;
  stats.T = T;
  stats.tau = schedule.tau();
  stats.deltas = options.deltas;

  const double L = p.smoothness();
  const double mu = p.pl_constant();
  stats.recursion_checked = schedule.max_step() <= (1.0 / L) * (1.0 + 1e-12);
  if (stats.recursion_checked) {
    SGDEnvelopeConfig cfg;
    cfg.smoothness = L;
    cfg.pl_constant = mu;
    cfg.sigma = oracle.sigma;
    cfg.batch = oracle.batch;
    cfg.dimension = p.dimension();
    cfg.c1 = options.c1;
    cfg.c2 = options.c2;
    cfg.schedule = schedule;
    cfg.x0 = p.gap(x0);
    stats.bounds = sgd_envelope(cfg, T, options.deltas);
  }

  const std::size_t n_cp = checkpoints.size();
  // cp_values[c][trial]; every trial writes only its own slot.
  std::vector<std::vector<double>> cp_values(n_cp, std::vector<double>(N, 0.0));
  std::vector<char> failed(N, 0);

  struct BlockResult {
    std::vector<double> sum;
    std::uint64_t completed = 0;
    std::uint64_t violations = 0;
    double max_radius = 0.0;
    std::vector<std::pair<std::uint32_t, std::int64_t>> diverged;
    std::vector<Trajectory> kept;
  };
  const std::uint64_t blocks = block_count(N);
  std::vector<BlockResult> results(blocks);
  GradientOracle trial_oracle = oracle;
  trial_oracle.stream = seed;

  parallel_for(blocks, options.threads, [&](std::size_t blk) {
    BlockResult& out = results[blk];
    out.sum.assign(static_cast<std::size_t>(T) + 1, 0.0);
    std::vector<double> gaps(static_cast<std::size_t>(T) + 1);
    const std::uint64_t lo = blk * kBlock;
    const std::uint64_t hi = std::min(N, lo + kBlock);
    for (std::uint64_t trial = lo; trial < hi; ++trial) {
      const auto id = static_cast<std::uint32_t>(trial);
      const bool keep = trial < options.keep_trajectories;
      Trajectory traj;
      traj.trial_id = id;
      if (keep) traj.rows.reserve(static_cast<std::size_t>(T) + 1);
      TrajectoryRow previous;
      std::uint64_t violations = 0;
      double radius = 0.0;
      try {
        traj.final_iterate = run_sgd_streaming(
            p, trial_oracle, schedule, T, id, x0,
            [&](std::int64_t t, const TrajectoryRow& row) {
              gaps[static_cast<std::size_t>(t)] = row.gap;
              radius = std::max(radius, row.radius);
              if (stats.recursion_checked && t > 0 &&
                  recursion_violated(previous, row.gap, L, mu)) {
                ++violations;
              }
              previous = row;
              if (keep) traj.rows.push_back(row);
            });
      } catch (const DivergenceError& e) {
        out.diverged.emplace_back(id, e.step());
        failed[trial] = 1;
        continue;
      }
      for (std::size_t t = 0; t < gaps.size(); ++t) out.sum[t] += gaps[t];
      for (std::size_t c = 0; c < n_cp; ++c) {
        cp_values[c][trial] = gaps[static_cast<std::size_t>(checkpoints[c])];
      }
      ++out.completed;
      out.violations += violations;
      out.max_radius = std::max(out.max_radius, radius);
      if (keep) out.kept.push_back(std::move(traj));
    }
  });

  std::vector<double> total(static_cast<std::size_t>(T) + 1, 0.0);
  for (auto& r : results) {
    for (std::size_t t = 0; t < total.size(); ++t) total[t] += r.sum[t];
    stats.trials += r.completed;
    stats.recursion_violations += r.violations;
    stats.max_radius = std::max(stats.max_radius, r.max_radius);
    for (auto& d : r.diverged) stats.diverged.push_back(d);
    for (auto& k : r.kept) stats.kept.push_back(std::move(k));
  }
  if (stats.trials == 0) throw NumericError("every ensemble trial diverged");
  const double count = static_cast<double>(stats.trials);
  for (auto& v : total) v /= count;
  stats.mean_gap = std::move(total);

  for (std::size_t c = 0; c < n_cp; ++c) {
    std::vector<double> values;
    values.reserve(stats.trials);
    for (std::uint64_t i = 0; i < N; ++i) {
      if (!failed[i]) values.push_back(cp_values[c][i]);
    }
    CheckpointStats cs;
    cs.t = checkpoints[c];
    // Share the block-ordered sum so the summary and the mean curve agree.
    cs.mean = stats.mean_gap[static_cast<std::size_t>(cs.t)];
    double ss = 0.0;
    for (double v : values) ss += (v - cs.mean) * (v - cs.mean);
    cs.sd = values.size() > 1 ? std::sqrt(ss / (count - 1.0)) : 0.0;

    if (stats.bounds) {
      const auto t = static_cast<std::size_t>(cs.t);
      cs.k = stats.bounds->k[t];
      cs.expected_bound = stats.bounds->expected[t];
      double mgf = 0.0;
      for (double v : values) {
        mgf += cs.k > 0.0 ? std::exp(v / cs.k)
                          : (v == 0.0 ? 1.0
                                      : std::numeric_limits<double>::infinity());
      }
      cs.mgf_stat = mgf / count;
      for (std::size_t j = 0; j < options.deltas.size(); ++j) {
        const double env = stats.bounds->envelopes[j][t];
        std::uint64_t exceed = 0;
        for (double v : values) exceed += v > env ? 1 : 0;
        cs.envelope.push_back(env);
        cs.exceed.push_back(exceed);
        cs.exceed_upper.push_back(binomial_upper_bound(exceed, stats.trials));
      }
    }

    std::sort(values.begin(), values.end());
    cs.q50 = sorted_quantile(values, 0.5);
    cs.q90 = sorted_quantile(values, 0.9);
    cs.q95 = sorted_quantile(values, 0.95);
    cs.q99 = sorted_quantile(values, 0.99);
    stats.checkpoints.push_back(std::move(cs));
  }
  return stats;
}

double rate_fit(const EnsembleStats& stats, std::int64_t t_lo,
                std::int64_t t_hi) {
  if (t_lo < 1 || t_hi < 2 * t_lo || t_lo < stats.tau) {
    throw InvalidArgument("rate fit needs t_hi >= 2 t_lo >= 2 tau");
  }
  if (t_hi >= static_cast<std::int64_t>(stats.mean_gap.size())) {
    throw InvalidArgument("rate fit window exceeds the ensemble horizon");
  }
  std::vector<double> ts, ys;
  for (auto t : log_grid(t_lo, t_hi, 40)) {
    const double y = stats.mean_gap[static_cast<std::size_t>(t)];
    if (!(y > 0.0)) throw InvalidArgument("rate fit needs positive mean gaps");
    ts.push_back(static_cast<double>(t));
    ys.push_back(y);
  }
  return loglog_slope(ts, ys);
}

// ---------------------------------------------------------------------------
// Coupled stability runs

std::uint64_t CoupledStats::total_violations() const {
  std::uint64_t total = 0;
  for (auto v : violations) total += v;
  return total;
}

CoupledStats run_coupled(const LogisticProblem& base,
                         const LogisticProblem& neighbor, std::size_t i_star,
                         const LogisticData& fresh, std::uint32_t batch,
                         const StepSchedule& schedule, std::int64_t T,
                         std::uint64_t replicates, std::uint64_t seed,
                         unsigned threads) {
  if (schedule.kind() != ScheduleKind::kStability) {
    throw InvalidArgument("coupled runs need the stability schedule c/(t+1)");
  }
  if (T < 1) throw InvalidArgument("T must be >= 1");
  if (replicates < 1) throw InvalidArgument("replicates must be >= 1");
  const LogisticData& da = base.data();
  const LogisticData& db = neighbor.data();
  if (da.size() != db.size() || da.dimension() != db.dimension() ||
      base.lambda_r() != neighbor.lambda_r()) {
    throw InvalidArgument("coupled datasets differ in shape or regularizer");
  }
  if (i_star >= da.size()) throw InvalidArgument("i_star out of range");
  for (std::size_t i = 0; i < da.size(); ++i) {
    if (i == i_star) continue;
    const auto col = static_cast<Eigen::Index>(i);
    if (da.labels[col] != db.labels[col] ||
        da.features.col(col) != db.features.col(col)) {
      throw InvalidArgument("coupled datasets differ outside i_star (index " +
                            std::to_string(i) + ")");
    }
  }
  if (fresh.size() > 0 && fresh.dimension() != da.dimension()) {
    throw InvalidArgument("surrogate samples have the wrong dimension");
  }
  const auto n = static_cast<std::uint32_t>(da.size());
  if (batch < 1 || batch > n) throw InvalidBatch("batch outside [1, n]");

  CoupledStats stats;
  stats.replicates = replicates;
  stats.T = T;
  stats.n = n;
  stats.batch = batch;
  stats.i_star = i_star;
  stats.smoothness = std::max(base.smoothness(), neighbor.smoothness());
  stats.rho = std::max(base.lipschitz_bound(), neighbor.lipschitz_bound());
  stats.c = schedule.c();
  const double L = stats.smoothness;
  const double rho = stats.rho;
  const double lambda = base.lambda_r();
  const int d = base.dimension();

  struct BlockResult {
    std::vector<double> sum;
    std::vector<double> max;
    std::vector<std::uint64_t> violations;
    std::uint64_t hits = 0;
  };
  const std::uint64_t blocks = block_count(replicates);
  std::vector<BlockResult> results(blocks);
  stats.sup_deviation.assign(replicates, 0.0);

  parallel_for(blocks, threads, [&](std::size_t blk) {
    BlockResult& out = results[blk];
    const auto len = static_cast<std::size_t>(T) + 1;
    out.sum.assign(len, 0.0);
    out.max.assign(len, 0.0);
    out.violations.assign(len, 0);
    const std::uint64_t lo = blk * kBlock;
    const std::uint64_t hi = std::min(replicates, lo + kBlock);
    Vector ga(d), gb(d);
    for (std::uint64_t r = lo; r < hi; ++r) {
      Vector x = Vector::Zero(d);
      Vector y = Vector::Zero(d);
      double delta = 0.0;
      for (std::int64_t t = 0; t < T; ++t) {
        const double eta = schedule(t);
        const CoupledDraw draw =
            coupled_indices(n, batch, static_cast<std::uint32_t>(i_star),
                            static_cast<std::uint32_t>(t), seed,
                            static_cast<std::uint32_t>(r));
        ga.setZero();
        gb.setZero();
        const double w = 1.0 / static_cast<double>(batch);
        for (auto i : draw.indices) {
          base.add_component_gradient(i, x, w, ga);
          neighbor.add_component_gradient(i, y, w, gb);
        }
        x -= eta * ga;
        y -= eta * gb;
        const double next = (x - y).norm();
        const double bound =
            draw.hit ? delta + 2.0 * eta * rho : (1.0 + eta * L) * delta;
        if (next > bound + 1e-12 * (1.0 + bound)) {
          ++out.violations[static_cast<std::size_t>(t)];
        }
        out.hits += draw.hit ? 1 : 0;
        delta = next;
        out.sum[static_cast<std::size_t>(t) + 1] += delta;
        out.max[static_cast<std::size_t>(t) + 1] =
            std::max(out.max[static_cast<std::size_t>(t) + 1], delta);
      }
      double sup = 0.0;
      auto scan = [&](const LogisticData& data) {
        for (std::size_t i = 0; i < data.size(); ++i) {
          const auto col = data.features.col(static_cast<Eigen::Index>(i));
          const double yi = data.labels[static_cast<Eigen::Index>(i)];
          sup = std::max(sup, std::abs(logistic_loss(x, col, yi, lambda) -
                                       logistic_loss(y, col, yi, lambda)));
        }
      };
      scan(da);
      scan(db);
      scan(fresh);
      stats.sup_deviation[r] = sup;
    }
  });

  const auto len = static_cast<std::size_t>(T) + 1;
  stats.delta_mean.assign(len, 0.0);
  stats.delta_max.assign(len, 0.0);
  stats.violations.assign(len, 0);
  for (const auto& r : results) {
    for (std::size_t t = 0; t < len; ++t) {
      stats.delta_mean[t] += r.sum[t];
      stats.delta_max[t] = std::max(stats.delta_max[t], r.max[t]);
      stats.violations[t] += r.violations[t];
    }
    stats.hits += r.hits;
  }
  const double reps = static_cast<double>(replicates);
  for (auto& v : stats.delta_mean) v /= reps;
  stats.hit_rate = static_cast<double>(stats.hits) / (reps * static_cast<double>(T));
  double total = 0.0;
  for (double s : stats.sup_deviation) total += s;
  stats.mean_sup_deviation = total / reps;
  stats.stability_bound =
      stability_bound(rho, T, L, stats.c, batch, static_cast<std::int64_t>(n));
  return stats;
}

// ---------------------------------------------------------------------------
// Risk balance

std::vector<RiskReport> run_risk_balance(const RiskSpec& spec) {
  if (spec.heldout < 10000) {
    throw InvalidArgument("held-out set needs at least 1e4 samples");
  }
  if (spec.replicates < 1) throw InvalidArgument("replicates must be >= 1");
  if (spec.multipliers.empty()) throw InvalidArgument("empty multiplier grid");
  for (double m : spec.multipliers) {
    if (!(m >= 0.0) || !std::isfinite(m)) {
      throw InvalidArgument("multipliers must be finite and >= 0");
    }
  }
  if (!(spec.delta > 0.0) || !(spec.delta < 1.0)) {
    throw InvalidArgument("delta must lie in (0, 1)");
  }
  if (spec.n < 2) throw InvalidArgument("n must be >= 2");
  if (spec.batch < 1 || spec.batch > spec.n) throw InvalidBatch("batch outside [1, n]");
  if (spec.max_T < 1) throw InvalidArgument("max_T must be >= 1");

  const LogisticDistribution dist(spec.dimension, spec.data_seed);
  const LogisticData heldout = dist.sample(spec.heldout, 2, 0);

  // Replicate 0 fixes the PL constant (pilot estimate) for every replicate.
  LogisticOptions pilot;
  pilot.pilot_points = spec.pilot_points;
  const auto first = std::make_shared<LogisticProblem>(
      dist.sample(static_cast<std::size_t>(spec.n), 1, 0), spec.lambda_r, pilot);
  const double mu = first->pl_constant();
  const double L = first->smoothness();
  const double rho = first->lipschitz_bound();
  const double M = first->loss_bound();
  const Horizon horizon = hprisk_horizon(L, spec.dimension, spec.sigma, M, rho,
                                         mu, spec.batch, spec.n);

  std::vector<std::int64_t> horizons;
  for (double m : spec.multipliers) {
    const double raw = std::ceil(m * horizon.raw);
    horizons.push_back(static_cast<std::int64_t>(
        std::clamp(raw, 1.0, static_cast<double>(spec.max_T))));
  }
  const std::int64_t T_max = *std::max_element(horizons.begin(), horizons.end());
  const StepSchedule schedule = StepSchedule::stability(horizon.c);

  struct Outcome {
    std::vector<double> F, f, excess, conv;
  };
  std::vector<Outcome> outcomes(spec.replicates);

  parallel_for(spec.replicates, spec.threads, [&](std::size_t r) {
    std::shared_ptr<const LogisticProblem> problem = first;
    if (r > 0) {
      LogisticOptions opts;
      opts.mu_override = mu;
      opts.radius = first->radius();
      problem = std::make_shared<LogisticProblem>(
          dist.sample(static_cast<std::size_t>(spec.n), 1,
                      static_cast<std::uint32_t>(r)),
          spec.lambda_r, opts);
    }
    const int d = problem->dimension();
    Vector x = Vector::Zero(d);
    const double x0_gap = problem->gap(x);

    SGDEnvelopeConfig cfg;
    cfg.smoothness = problem->smoothness();
    cfg.pl_constant = std::min(mu, cfg.smoothness);
    cfg.sigma = spec.sigma;
    cfg.batch = spec.batch;
    cfg.dimension = d;
    cfg.c1 = spec.c1;
    cfg.c2 = spec.c2;
    cfg.schedule = schedule;
    cfg.x0 = x0_gap;
    const std::vector<double> k = envelope_sequence(sgd_recursion(cfg, T_max));

    GradientOracle oracle;
    oracle.mode = OracleMode::kFiniteSumSubsample;
    oracle.batch = spec.batch;
    oracle.stream = spec.seed;
    Outcome& out = outcomes[r];
    out.F.resize(horizons.size());
    out.f.resize(horizons.size());
    out.excess.resize(horizons.size());
    out.conv.resize(horizons.size());
    auto record = [&](std::int64_t t) {
      for (std::size_t m = 0; m < horizons.size(); ++m) {
        if (horizons[m] != t) continue;
        const double F = problem->mean_loss(x, heldout);
        const double f = problem->value(x);
        out.F[m] = F;
        out.f[m] = f;
        out.excess[m] = F - problem->optimal_value();
        out.conv[m] = k[static_cast<std::size_t>(t)] * confidence_factor(spec.delta);
      }
    };
    for (std::int64_t t = 0; t < T_max; ++t) {
      const GradientSample g = sample_gradient(oracle, *problem, x,
                                               static_cast<std::uint32_t>(r),
                                               static_cast<std::uint32_t>(t));
      x = step(x, schedule(t), g.gradient);
      record(t + 1);
    }
  });

  std::vector<RiskReport> reports;
  const double reps = static_cast<double>(spec.replicates);
  for (std::size_t m = 0; m < horizons.size(); ++m) {
    RiskReport rep;
    rep.multiplier = spec.multipliers[m];
    rep.T = horizons[m];
    rep.c = horizon.c;
    rep.replicates = spec.replicates;
    rep.gen_bound = generalization_bound(M, rho, rep.T, L, horizon.c,
                                         spec.batch, spec.n, spec.delta);
    double F = 0.0, f = 0.0, excess = 0.0, conv = 0.0;
    for (const auto& o : outcomes) {
      F += o.F[m];
      f += o.f[m];
      excess += o.excess[m];
      conv += o.conv[m];
      if (o.F[m] - o.f[m] > rep.gen_bound) ++rep.exceed_count;
    }
    rep.F_est = F / reps;
    rep.f_est = f / reps;
    rep.gap = rep.F_est - rep.f_est;
    rep.excess = excess / reps;
    rep.conv_bound = conv / reps;
    rep.combined_bound = rep.conv_bound + rep.gen_bound;
    rep.exceed_frac = static_cast<double>(rep.exceed_count) / reps;
    reports.push_back(rep);
  }
  return reports;
}

// ---------------------------------------------------------------------------
// Counterexample

CounterexampleReport run_counterexample_demo(const CounterexampleSpec& spec,
                                             double eta, std::int64_t T) {
  spec.validate();
  if (!std::isfinite(spec.radius)) {
    throw InvalidArgument("counterexample demo needs a finite feasible radius");
  }
  CounterexampleReport report;
  report.spec = spec;
  report.eta = eta;
  report.T = T;

  CounterexampleSpec free = spec;
  free.radius = std::numeric_limits<double>::infinity();
  const ProjectedRun unconstrained = run_projected_gd(free, eta, T);
  report.unconstrained_value = unconstrained.final_value;
  report.unconstrained_point = unconstrained.final_point;

  report.projected = run_projected_gd(spec, eta, T);
  report.projected_value = report.projected.final_value;
  report.projected_point = report.projected.final_point;
  report.expected_stall = {spec.start_x - spec.radius, 0.0};
  report.stall_distance =
      std::hypot(report.projected_point[0] - report.expected_stall[0],
                 report.projected_point[1] - report.expected_stall[1]);

  report.reaches_minimum = report.unconstrained_value <= 1e-6;
  report.stalls = report.projected_value >= 1e-3;
  report.stall_matches = report.stall_distance <= 1e-3;
  return report;
}

}  // namespace plsgd
