#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "plsgd/csv.hpp"
#include "plsgd/errors.hpp"
#include "plsgd/experiments.hpp"
#include "plsgd/problems.hpp"

using namespace plsgd;

namespace {

LogisticOptions with_pilot(int points) {
  LogisticOptions o;
  o.pilot_points = points;
  return o;
}

std::shared_ptr<const QuadraticProblem> unit_quadratic(int d) {
  return make_quadratic(d, std::vector<double>(d, 1.0), std::vector<double>(d, 0.0));
}

GradientOracle gaussian(double sigma, std::uint32_t b = 1) {
  return GradientOracle{OracleMode::kAdditiveGaussian, sigma, b, 0};
}

}  // namespace

TEST(DefaultStart, QuadraticOffsetAndLogisticOrigin) {
  const auto q = make_quadratic(4, {1, 2, 3, 4}, {1, 1, 1, 1});
  EXPECT_NEAR((default_start(*q, 1.0) - q->minimizer()).norm(), 1.0, 1e-15);
  const auto l = make_logistic(10, 3, 1, 0.1, with_pilot(100));
  EXPECT_EQ(default_start(*l, 1.0), Vector::Zero(3));
}

TEST(DefaultCheckpoints, DecadesInsideHorizon) {
  EXPECT_EQ(default_checkpoints(1000), (std::vector<std::int64_t>{10, 100, 1000}));
  EXPECT_EQ(default_checkpoints(20000),
            (std::vector<std::int64_t>{10, 100, 1000, 10000}));
  EXPECT_EQ(default_checkpoints(5), (std::vector<std::int64_t>{5}));
}

TEST(RunEnsemble, NoiselessTrialsAreIdenticalAndNeverExceed) {
  const auto p = unit_quadratic(10);
  const auto s = StepSchedule::theta(1.0, 1.0);
  EnsembleOptions opt;
  opt.checkpoints = {1, 2, 3};
  const auto stats = run_ensemble(*p, gaussian(0.0), s, 3, 100, 1, opt);
  EXPECT_EQ(stats.trials, 100u);
  for (const auto& c : stats.checkpoints) {
    EXPECT_EQ(c.q50, c.q99);
    EXPECT_EQ(c.sd, 0.0);
    for (auto e : c.exceed) EXPECT_EQ(e, 0u);
  }
  EXPECT_EQ(stats.recursion_violations, 0u);
}

TEST(RunEnsemble, RequiresAtLeastOneHundredTrials) {
  const auto p = unit_quadratic(2);
  EXPECT_THROW(run_ensemble(*p, gaussian(1.0), StepSchedule::theta(1, 1), 10, 99, 1),
               InvalidArgument);
}

TEST(RunEnsemble, InvariantsOfCheckpointStatistics) {
  const auto p = unit_quadratic(10);
  const auto s = StepSchedule::theta(1.0, 1.0);
  const auto stats = run_ensemble(*p, gaussian(1.0), s, 1000, 400, 5);
  ASSERT_TRUE(stats.bounds.has_value());
  ASSERT_EQ(stats.checkpoints.size(), 3u);
  EXPECT_TRUE(stats.recursion_checked);
  EXPECT_EQ(stats.recursion_violations, 0u);
  for (const auto& c : stats.checkpoints) {
    EXPECT_LE(c.q50, c.q90);
    EXPECT_LE(c.q90, c.q95);
    EXPECT_LE(c.q95, c.q99);
    for (std::size_t j = 0; j < c.exceed.size(); ++j) {
      EXPECT_LE(c.exceed[j], stats.trials);
      EXPECT_GE(c.exceed_upper[j], static_cast<double>(c.exceed[j]) / stats.trials);
      EXPECT_DOUBLE_EQ(c.envelope[j], stats.bounds->envelopes[j][c.t]);
    }
    EXPECT_GT(c.mgf_stat, 1.0);
    EXPECT_DOUBLE_EQ(c.mean, stats.mean_gap[c.t]);
  }
}

TEST(RunEnsemble, ResultIndependentOfThreadCount) {
  const auto p = unit_quadratic(5);
  const auto s = StepSchedule::theta(1.0, 1.0);
  EnsembleOptions one, many;
  one.threads = 1;
  many.threads = 4;
  one.keep_trajectories = many.keep_trajectories = 3;
  const auto a = run_ensemble(*p, gaussian(1.0), s, 200, 150, 9, one);
  const auto b = run_ensemble(*p, gaussian(1.0), s, 200, 150, 9, many);
  EXPECT_EQ(ensemble_summary_csv(a), ensemble_summary_csv(b));
  EXPECT_EQ(mean_gap_csv(a), mean_gap_csv(b));
  EXPECT_EQ(trajectory_csv(a.kept), trajectory_csv(b.kept));
}

TEST(RunEnsemble, ThetaMeanGapMatchesExactRecursion) {
  const auto p = unit_quadratic(10);
  const auto s = StepSchedule::theta(1.0, 1.0);
  EnsembleOptions opt;
  opt.checkpoints = {10000};
  const auto stats = run_ensemble(*p, gaussian(1.0), s, 10000, 300, 17, opt);
  // With f = |x|^2 / 2 and E|e|^2 = sigma^2 the mean gap follows
  // m_{t+1} = (1 - eta_t)^2 m_t + eta_t^2 / 2 exactly.
  double m = stats.mean_gap[0];
  for (std::int64_t t = 0; t < 10000; ++t) {
    const double eta = s(t);
    m = (1.0 - eta) * (1.0 - eta) * m + 0.5 * eta * eta;
  }
  // The gap is chi-square with 10 degrees of freedom, so 300 trials leave a
  // relative standard error near 0.026.
  EXPECT_NEAR(stats.mean_gap.back() / m, 1.0, 0.1);
  EXPECT_NEAR(m * 10000.0, 2.0 / 3.0, 0.01);
}

TEST(RateFit, NoiselessThetaDecaysAtLeastLinearly) {
  const auto p = make_quadratic(2, {0.5, 1.0}, {0.0, 0.0});
  const auto s = StepSchedule::theta(1.0, 0.5);
  EnsembleOptions opt;
  opt.checkpoints = {400};
  const auto stats = run_ensemble(*p, gaussian(0.0), s, 400, 100, 1, opt);
  EXPECT_LE(rate_fit(stats, 10, 400), -1.0);
  EXPECT_THROW(rate_fit(stats, 2, 400), InvalidArgument);  // t_lo < tau
  EXPECT_THROW(rate_fit(stats, 100, 150), InvalidArgument);
}

TEST(RunCoupled, IdenticalSampleGivesZeroDivergence) {
  const auto base = make_logistic(20, 3, 4, 0.1, with_pilot(200));
  const Vector same = base->data().features.col(5);
  const auto twin = make_neighbor(*base, 5, same, base->data().labels(5));
  const LogisticDistribution dist(3, 4);
  const auto fresh = dist.sample(50, 4, 0);
  const auto stats = run_coupled(*base, *twin, 5, fresh, 1,
                                 StepSchedule::stability(1.0 / base->smoothness()),
                                 100, 20, 3);
  for (double d : stats.delta_max) EXPECT_EQ(d, 0.0);
  EXPECT_EQ(stats.total_violations(), 0u);
  EXPECT_EQ(stats.mean_sup_deviation, 0.0);
}

TEST(RunCoupled, FullBatchAlwaysHitsAndGrowthLemmaHolds) {
  const auto base = make_logistic(8, 3, 6, 0.1, with_pilot(200));
  Vector a(3);
  a << 0.0, 0.0, 1.0;
  const auto nb = make_neighbor(*base, 2, a, -base->data().labels(2));
  const LogisticDistribution dist(3, 6);
  const auto stats = run_coupled(*base, *nb, 2, dist.sample(10, 4, 0), 8,
                                 StepSchedule::stability(1.0 / base->smoothness()),
                                 50, 10, 2);
  EXPECT_EQ(stats.hits, 500u);
  EXPECT_DOUBLE_EQ(stats.hit_rate, 1.0);
  EXPECT_EQ(stats.total_violations(), 0u);
  EXPECT_EQ(stats.delta_mean[0], 0.0);
  EXPECT_GT(stats.delta_max.back(), 0.0);
}

TEST(RunCoupled, RejectsMismatchedDatasetsAndSchedules) {
  const auto a = make_logistic(10, 2, 1, 0.1, with_pilot(100));
  const auto b = make_logistic(10, 2, 2, 0.1, with_pilot(100));
  const LogisticDistribution dist(2, 1);
  const auto fresh = dist.sample(5, 4, 0);
  const auto sched = StepSchedule::stability(1.0);
  EXPECT_THROW(run_coupled(*a, *b, 0, fresh, 1, sched, 10, 2, 1), InvalidArgument);
  EXPECT_THROW(run_coupled(*a, *a, 0, fresh, 1, StepSchedule::constant(0.1), 10, 2, 1),
               InvalidArgument);
  EXPECT_THROW(run_coupled(*a, *a, 0, fresh, 11, sched, 10, 2, 1), InvalidBatch);
}

TEST(RunRiskBalance, ReportsAreConsistent) {
  RiskSpec spec;
  spec.n = 50;
  spec.multipliers = {0.0, 1.0};
  spec.replicates = 12;
  spec.heldout = 10000;
  const auto reports = run_risk_balance(spec);
  ASSERT_EQ(reports.size(), 2u);
  EXPECT_EQ(reports[0].T, 1);
  for (const auto& r : reports) {
    EXPECT_NEAR(r.gap, r.F_est - r.f_est, 1e-12);
    EXPECT_EQ(r.replicates, 12u);
    EXPECT_LE(r.exceed_count, r.replicates);
    EXPECT_GT(r.gen_bound, 0.0);
    EXPECT_NEAR(r.combined_bound, r.conv_bound + r.gen_bound, 1e-12 * r.combined_bound);
  }
  EXPECT_GT(reports[0].excess, reports[1].excess);
}

TEST(RunRiskBalance, ExcessRiskFallsWithSampleSize) {
  std::vector<double> excess;
  for (std::int64_t n : {25, 200, 1600}) {
    RiskSpec spec;
    spec.n = n;
    spec.multipliers = {1.0};
    spec.replicates = 16;
    spec.heldout = 10000;
    spec.max_T = 20000;
    excess.push_back(run_risk_balance(spec)[0].excess);
  }
  EXPECT_GT(excess[0], excess[1]);
  EXPECT_GT(excess[1], excess[2]);
}

TEST(RunRiskBalance, RejectsSmallHeldOutSet) {
  RiskSpec spec;
  spec.heldout = 9999;
  EXPECT_THROW(run_risk_balance(spec), InvalidArgument);
}

TEST(CounterexampleDemo, ReportsTheThreeFacts) {
  const auto report = run_counterexample_demo(default_counterexample(), 0.4, 20000);
  EXPECT_TRUE(report.reaches_minimum);
  EXPECT_TRUE(report.stalls);
  EXPECT_TRUE(report.stall_matches);
  EXPECT_NEAR(report.expected_stall[0], 2.0 - report.spec.radius, 1e-15);
  EXPECT_LE(report.stall_distance, 1e-3);
}

TEST(CounterexampleDemo, RadiusCoveringMinimizersLetsProjectionConverge) {
  auto spec = default_counterexample();
  spec.radius = 3.0;
  const auto report = run_counterexample_demo(spec, 0.4, 20000);
  EXPECT_LE(report.projected_value, 1e-6);
  EXPECT_FALSE(report.stalls);
  spec.radius = std::numeric_limits<double>::infinity();
  EXPECT_THROW(run_counterexample_demo(spec, 0.4, 10), InvalidArgument);
}

TEST(Csv, HeadersMatchTheDocumentedSchemas) {
  const auto p = unit_quadratic(3);
  EnsembleOptions opt;
  opt.keep_trajectories = 1;
  const auto stats = run_ensemble(*p, gaussian(1.0), StepSchedule::theta(1, 1), 20,
                                  100, 1, opt);
  auto header = [](const std::string& csv) { return csv.substr(0, csv.find('\n')); };
  EXPECT_EQ(header(ensemble_summary_csv(stats)),
            "t,mean,q50,q90,q95,q99,env_d10,env_d05,env_d01,exceed_d10,exceed_d05,"
            "exceed_d01,mgf_stat,expected_bound");
  EXPECT_EQ(header(bounds_csv(*stats.bounds)),
            "t,K_t,env_d10,env_d05,env_d01,expected_bound,closedform_K_t");
  EXPECT_EQ(header(trajectory_csv(stats.kept)),
            "trial_id,t,gap,grad_norm_sq,eta,radius,inner,err_norm_sq");
  EXPECT_EQ(header(risk_csv({})),
            "multiplier,T,c,F_est,f_est,gap,conv_bound,gen_bound,combined_bound,"
            "exceed_frac");
  EXPECT_EQ(header(coupled_csv(CoupledStats{})), "t,delta_mean,delta_max,violations");
}

TEST(Csv, NumbersUseShortestRoundTrip) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(1e-20), "1e-20");
  EXPECT_EQ(format_number(3.0), "3");
  EXPECT_EQ(std::stod(format_number(1.0 / 3.0)), 1.0 / 3.0);
  EXPECT_EQ(delta_label(0.1), "d10");
  EXPECT_EQ(delta_label(0.05), "d05");
  EXPECT_EQ(delta_label(0.01), "d01");
}
