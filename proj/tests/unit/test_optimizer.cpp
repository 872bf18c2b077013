#include <gtest/gtest.h>

#include <cmath>

#include "plsgd/counterexample.hpp"
#include "plsgd/errors.hpp"
#include "plsgd/optimizer.hpp"
#include "plsgd/problems.hpp"

using namespace plsgd;

namespace {

GradientOracle gaussian(double sigma, std::uint32_t b = 1) {
  GradientOracle o;
  o.mode = OracleMode::kAdditiveGaussian;
  o.sigma = sigma;
  o.batch = b;
  return o;
}

Vector ones(int d, double scale) {
  return Vector::Constant(d, scale / std::sqrt(static_cast<double>(d)));
}

}  // namespace

TEST(Schedule, ThetaBurnInThenDecay) {
  const auto s = StepSchedule::theta(1.0, 0.5);
  EXPECT_EQ(s.tau(), 4);
  EXPECT_DOUBLE_EQ(s(0), 1.0);
  EXPECT_DOUBLE_EQ(s(3), 1.0);
  EXPECT_DOUBLE_EQ(s(4), 0.72);
  EXPECT_DOUBLE_EQ(s(9), 19.0 / (0.5 * 100.0));
  EXPECT_DOUBLE_EQ(s.max_step(), 1.0);
}

TEST(Schedule, ThetaNeverExceedsInverseSmoothness) {
  for (double mu : {0.01, 0.3, 0.7, 1.0}) {
    const auto s = StepSchedule::theta(2.0, mu * 2.0);
    for (std::int64_t t = 0; t < 5000; ++t) ASSERT_LE(s(t), 0.5 * (1 + 1e-15));
  }
}

TEST(Schedule, SlowAndStability) {
  const auto slow = StepSchedule::slow(0.25, 1.0);
  EXPECT_DOUBLE_EQ(slow(0), 0.25);
  EXPECT_DOUBLE_EQ(slow(2), 0.125);
  const auto stab = StepSchedule::stability(0.5);
  EXPECT_DOUBLE_EQ(stab(0), 0.5);
  EXPECT_DOUBLE_EQ(stab(4), 0.1);
  EXPECT_DOUBLE_EQ(StepSchedule::constant(0.3)(1000), 0.3);
}

TEST(Schedule, GuardsRejectInvalidParameters) {
  EXPECT_THROW(StepSchedule::slow(1.0, 1.0), InvalidArgument);
  EXPECT_THROW(StepSchedule::slow(0.0, 1.0), InvalidArgument);
  EXPECT_THROW(StepSchedule::theta(1.0, 2.0), InvalidArgument);
  EXPECT_THROW(StepSchedule::theta(1.0, 0.0), InvalidArgument);
  EXPECT_THROW(StepSchedule::stability(0.0), InvalidArgument);
  EXPECT_THROW(StepSchedule::constant(-0.1), InvalidArgument);
}

TEST(Schedule, KindNamesRoundTrip) {
  for (auto k : {ScheduleKind::kTheta, ScheduleKind::kSlow,
                 ScheduleKind::kStability, ScheduleKind::kConstant})
    EXPECT_EQ(schedule_kind_from_string(to_string(k)), k);
  EXPECT_THROW(schedule_kind_from_string("adam"), InvalidArgument);
}

TEST(Step, Arithmetic) {
  Vector x(2), g(2);
  x << 1, 2;
  g << 2, -2;
  const Vector y = step(x, 0.5, g);
  EXPECT_DOUBLE_EQ(y(0), 0.0);
  EXPECT_DOUBLE_EQ(y(1), 3.0);
  EXPECT_EQ(step(x, 0.7, Vector::Zero(2)), x);
}

TEST(Step, RejectsNonFinite) {
  Vector x = Vector::Ones(2), g = Vector::Ones(2);
  EXPECT_THROW(step(x, NAN, g), NumericError);
  EXPECT_THROW(step(x, -1.0, g), NumericError);
  g(1) = INFINITY;
  EXPECT_THROW(step(x, 0.1, g), NumericError);
}

TEST(RunSgd, UnitCurvatureUnitStepHitsMinimizer) {
  const auto p = make_quadratic(1, {1.0}, {0.0});
  Vector x0(1);
  x0 << 1.0;
  const auto tr = run_sgd(*p, gaussian(0.0), StepSchedule::constant(1.0), 5, 0, 1, x0);
  ASSERT_EQ(tr.rows.size(), 6u);
  EXPECT_DOUBLE_EQ(tr.rows[0].gap, 0.5);
  for (int t = 1; t <= 5; ++t) EXPECT_EQ(tr.rows[t].gap, 0.0);
  EXPECT_EQ(tr.final_iterate(0), 0.0);
}

TEST(RunSgd, NoiselessThetaDescendsMonotonically) {
  const auto p = make_quadratic(4, {0.2, 0.5, 1.0, 2.0}, {1.0, -1.0, 0.5, 0.0});
  Vector x0 = p->minimizer() + ones(4, 3.0);
  const auto s = StepSchedule::theta(p->smoothness(), p->pl_constant());
  const auto tr = run_sgd(*p, gaussian(0.0), s, 400, 0, 1, x0);
  for (std::size_t t = 1; t < tr.rows.size(); ++t)
    EXPECT_LE(tr.rows[t].gap, tr.rows[t - 1].gap) << t;
  EXPECT_TRUE(recursion_check(tr, *p, s).empty());
}

TEST(RunSgd, RowsRecordStepsRadiusAndNoise) {
  const auto p = make_quadratic(3, {1.0, 1.0, 1.0}, {0.0, 0.0, 0.0});
  Vector x0 = ones(3, 1.0);
  const auto s = StepSchedule::slow(0.5, 1.0);
  const auto tr = run_sgd(*p, gaussian(1.0), s, 50, 3, 9, x0);
  EXPECT_EQ(tr.trial_id, 3u);
  EXPECT_EQ(tr.rows[0].radius, 0.0);
  for (std::int64_t t = 0; t <= 50; ++t) {
    EXPECT_DOUBLE_EQ(tr.rows[t].eta, s(t));
    EXPECT_GE(tr.rows[t].err_norm_sq, 0.0);
    EXPECT_NEAR(tr.rows[t].grad_norm_sq, 2.0 * tr.rows[t].gap, 1e-12);
  }
  EXPECT_NEAR(tr.rows[50].radius, (tr.final_iterate - x0).norm(), 1e-14);
}

TEST(RunSgd, DeterministicGivenTrialAndSeed) {
  const auto q = make_quadratic(10, std::vector<double>(10, 1.0),
                                std::vector<double>(10, 0.0));
  const Vector x0 = ones(10, 1.0);
  const auto s = StepSchedule::theta(1.0, 1.0);
  const auto a = run_sgd(*q, gaussian(1.0), s, 200, 7, 42, x0);
  const auto b = run_sgd(*q, gaussian(1.0), s, 200, 7, 42, x0);
  const auto c = run_sgd(*q, gaussian(1.0), s, 200, 8, 42, x0);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t t = 0; t < a.rows.size(); ++t) {
    EXPECT_EQ(a.rows[t].gap, b.rows[t].gap);
    EXPECT_EQ(a.rows[t].inner, b.rows[t].inner);
  }
  EXPECT_NE(a.rows.back().gap, c.rows.back().gap);
}

TEST(RunSgd, DivergenceAbortsLoudly) {
  const auto p = make_quadratic(1, {1.0}, {0.0});
  Vector x0(1);
  x0 << 1.0;
  try {
    run_sgd(*p, gaussian(0.0), StepSchedule::constant(3.0), 200, 0, 1, x0);
    FAIL() << "expected divergence";
  } catch (const DivergenceError& e) {
    EXPECT_GT(e.step(), 0);
    EXPECT_GT(e.gap(), kDivergenceGap);
  }
}

TEST(RunSgd, StreamingMatchesRecorded) {
  const auto p = make_quadratic(5, {0.5, 0.6, 0.7, 0.8, 1.0},
                                std::vector<double>(5, 0.0));
  const Vector x0 = ones(5, 1.0);
  const auto s = StepSchedule::theta(1.0, 0.5);
  auto o = gaussian(0.7, 2);
  o.stream = 11;
  const auto tr = run_sgd(*p, o, s, 80, 2, 11, x0);
  std::vector<TrajectoryRow> streamed;
  const Vector last = run_sgd_streaming(
      *p, o, s, 80, 2, x0,
      [&](std::int64_t, const TrajectoryRow& r) { streamed.push_back(r); });
  ASSERT_EQ(streamed.size(), tr.rows.size());
  for (std::size_t t = 0; t < streamed.size(); ++t)
    EXPECT_EQ(streamed[t].gap, tr.rows[t].gap);
  EXPECT_EQ(last, tr.final_iterate);
}

TEST(RecursionCheck, NoisyQuadraticRunsSatisfyDescentInequality) {
  const auto p = make_quadratic(6, {0.3, 0.5, 0.9, 1.2, 1.6, 2.0},
                                std::vector<double>(6, 0.5));
  const auto s = StepSchedule::theta(p->smoothness(), p->pl_constant());
  for (std::uint32_t trial = 0; trial < 20; ++trial) {
    const auto tr = run_sgd(*p, gaussian(2.0, 1), s, 300, trial, 5,
                            p->minimizer() + ones(6, 1.0));
    EXPECT_TRUE(recursion_check(tr, *p, s).empty()) << trial;
  }
}

TEST(RecursionCheck, RejectsLargeStepsAndUninstrumentedTrajectories) {
  const auto p = make_quadratic(1, {1.0}, {0.0});
  Vector x0(1);
  x0 << 1.0;
  const auto big = StepSchedule::constant(1.5);
  auto tr = run_sgd(*p, gaussian(0.0), big, 5, 0, 1, x0);
  EXPECT_THROW(recursion_check(tr, *p, big), InvalidArgument);
  const auto ok = StepSchedule::constant(0.5);
  tr = run_sgd(*p, gaussian(0.0), ok, 5, 0, 1, x0);
  tr.instrumented = false;
  EXPECT_THROW(recursion_check(tr, *p, ok), InvalidArgument);
}

TEST(RecursionCheck, FlagsAnInflatedNextGap) {
  TrajectoryRow row;
  row.gap = 1.0;
  row.eta = 0.5;
  row.inner = 0.0;
  row.err_norm_sq = 0.0;
  // Noiseless bound with mu = L = 1: X_{t+1} <= 0.5 X_t.
  EXPECT_FALSE(recursion_violated(row, 0.5, 1.0, 1.0));
  EXPECT_TRUE(recursion_violated(row, 0.5 + 1e-6, 1.0, 1.0));
}

TEST(ProjectedGd, UnconstrainedRunReachesMinimum) {
  auto spec = default_counterexample();
  spec.radius = std::numeric_limits<double>::infinity();
  const auto run = run_projected_gd(spec, 0.4, 20000);
  EXPECT_LE(run.final_value, 1e-6);
  EXPECT_EQ(run.iterates.size(), 20001u);
}

TEST(ProjectedGd, ProjectedRunStallsAtTheNearestFeasiblePoint) {
  const auto spec = default_counterexample();
  const auto run = run_projected_gd(spec, 0.4, 2000);
  EXPECT_GE(run.final_value, 1e-3);
  EXPECT_NEAR(run.final_point[0], spec.start_x - spec.radius, 1e-3);
  EXPECT_NEAR(run.final_point[1], 0.0, 1e-3);
  for (const auto& q : run.iterates)
    EXPECT_LE(std::hypot(q[0] - spec.start_x, q[1]), spec.radius * (1 + 1e-12));
}

TEST(ProjectedGd, StartInsideMinimizerSetStays) {
  auto spec = default_counterexample();
  spec.radius = 4.0;
  const auto run = run_projected_gd(spec, 0.4, 50, {-1.0, 0.0});
  EXPECT_EQ(run.final_value, 0.0);
  EXPECT_EQ(run.final_point[0], -1.0);
  EXPECT_EQ(run.final_point[1], 0.0);
  EXPECT_EQ(run.fixed_point_step, 1);
}

TEST(ProjectedGd, RejectsStepAboveSmoothnessLimit) {
  const auto spec = default_counterexample();
  EXPECT_THROW(run_projected_gd(spec, 0.6, 10), InvalidArgument);
  EXPECT_THROW(run_projected_gd(spec, 0.0, 10), InvalidArgument);
}
