#include "plsgd/problems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "plsgd/errors.hpp"

namespace plsgd {

namespace {

// log(1 + exp(u)) without overflow.
double log1pexp(double u) {
  return u > 0.0 ? u + std::log1p(std::exp(-u)) : std::log1p(std::exp(u));
}

double sigmoid(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

constexpr double kGapTolerance = 1e-12;
constexpr double kStationarity = 1e-12;

}  // namespace

double Problem::gap(const Vector& x) const {
  const double g = value(x) - optimal_value_;
  if (g >= 0.0) return g;
  if (g >= -kGapTolerance * (1.0 + std::abs(optimal_value_))) return 0.0;
  throw NumericError("value " + std::to_string(value(x)) +
                     " below the recorded optimum " +
                     std::to_string(optimal_value_));
}

void Problem::set_constants(double smoothness, double pl_constant,
                            double optimal_value) {
  if (!(smoothness > 0.0) || !std::isfinite(smoothness)) {
    throw InvalidProblem("smoothness constant must be positive and finite");
  }
  if (!(pl_constant > 0.0) || !std::isfinite(pl_constant)) {
    throw InvalidProblem("PL constant must be positive and finite");
  }
  if (pl_constant > smoothness * (1.0 + 1e-12)) {
    throw InvalidProblem("PL constant exceeds smoothness constant");
  }
  if (!std::isfinite(optimal_value)) {
    throw InvalidProblem("optimal value must be finite");
  }
  smoothness_ = smoothness;
  pl_constant_ = std::min(pl_constant, smoothness);
  optimal_value_ = optimal_value;
}

// ---------------------------------------------------------------------------
// Quadratic

QuadraticProblem::QuadraticProblem(Vector spectrum, Vector minimizer,
                                   bool coordinate_split)
    : Problem(static_cast<int>(spectrum.size())),
      spectrum_(std::move(spectrum)),
      minimizer_(std::move(minimizer)),
      coordinate_split_(coordinate_split) {
  if (spectrum_.size() == 0) throw InvalidProblem("empty spectrum");
  if (minimizer_.size() != spectrum_.size()) {
    throw InvalidProblem("minimizer dimension does not match spectrum");
  }
  double mu = std::numeric_limits<double>::infinity();
  for (double lambda : spectrum_) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
      throw InvalidProblem("spectrum entries must be finite and nonnegative");
    }
    if (lambda > kDegenerateEigenvalue) mu = std::min(mu, lambda);
  }
  if (!std::isfinite(mu)) {
    throw InvalidProblem("spectrum has no entry above the degeneracy floor");
  }
  if (!minimizer_.allFinite()) throw InvalidProblem("non-finite minimizer");
  set_constants(spectrum_.maxCoeff(), mu, 0.0);
}

double QuadraticProblem::value(const Vector& x) const {
  return 0.5 * (spectrum_.array() * (x - minimizer_).array().square()).sum();
}

Vector QuadraticProblem::gradient(const Vector& x) const {
  return (spectrum_.array() * (x - minimizer_).array()).matrix();
}

std::optional<Vector> QuadraticProblem::project_to_minimizers(
    const Vector& x) const {
  Vector p = x;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (spectrum_[i] > 0.0) p[i] = minimizer_[i];
  }
  return p;
}

std::size_t QuadraticProblem::component_count() const {
  return static_cast<std::size_t>(spectrum_.size());
}

double QuadraticProblem::component_value(std::size_t i, const Vector& x) const {
  const auto k = static_cast<Eigen::Index>(i);
  const double r = x[k] - minimizer_[k];
  return 0.5 * static_cast<double>(dimension()) * spectrum_[k] * r * r;
}

void QuadraticProblem::add_component_gradient(std::size_t i, const Vector& x,
                                              double weight,
                                              Vector& out) const {
  const auto k = static_cast<Eigen::Index>(i);
  out[k] += weight * static_cast<double>(dimension()) * spectrum_[k] *
            (x[k] - minimizer_[k]);
}

double QuadraticProblem::component_smoothness() const {
  return static_cast<double>(dimension()) * smoothness();
}

double QuadraticProblem::lipschitz_bound() const {
  return std::numeric_limits<double>::infinity();
}

double QuadraticProblem::loss_bound() const {
  return std::numeric_limits<double>::infinity();
}

std::shared_ptr<const QuadraticProblem> make_quadratic(
    int d, const std::vector<double>& spectrum,
    const std::vector<double>& x_star, bool coordinate_split) {
  if (d < 1) throw InvalidProblem("dimension must be positive");
  if (spectrum.size() != static_cast<std::size_t>(d)) {
    throw InvalidProblem("spectrum must have d entries");
  }
  Vector minimizer = Vector::Zero(d);
  if (!x_star.empty()) {
    if (x_star.size() != static_cast<std::size_t>(d)) {
      throw InvalidProblem("x_star must have d entries");
    }
    minimizer = Eigen::Map<const Vector>(x_star.data(), d);
  }
  return std::make_shared<QuadraticProblem>(
      Eigen::Map<const Vector>(spectrum.data(), d), std::move(minimizer),
      coordinate_split);
}

// ---------------------------------------------------------------------------
// Logistic

namespace {
constexpr std::uint32_t kPlantedLane = 0xFFFFFFFFu;
}

LogisticDistribution::LogisticDistribution(int d, std::uint64_t seed,
                                           double planted_norm)
    : dimension_(d), seed_(seed), planted_(d) {
  if (d < 1) throw InvalidProblem("dimension must be positive");
  CounterRng rng(seed, Purpose::kData, 0, kPlantedLane);
  for (int i = 0; i < d; ++i) planted_[i] = rng.normal();
  planted_ *= planted_norm / planted_.norm();
}

LogisticData LogisticDistribution::sample(std::size_t count,
                                          std::uint32_t lane,
                                          std::uint32_t trial) const {
  LogisticData out{Matrix(dimension_, static_cast<Eigen::Index>(count)),
                   Vector(static_cast<Eigen::Index>(count))};
  CounterRng rng(seed_, Purpose::kData, trial, lane);
  for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(count); ++j) {
    auto a = out.features.col(j);
    for (int i = 0; i < dimension_; ++i) a[i] = rng.normal();
    a /= a.norm();
    const double p = sigmoid(planted_.dot(a));
    out.labels[j] = rng.uniform() < p ? 1.0 : -1.0;
  }
  return out;
}

double logistic_loss(const Vector& x, const Eigen::Ref<const Vector>& a,
                     double y, double lambda_r) {
  return log1pexp(-y * a.dot(x)) + 0.5 * lambda_r * x.squaredNorm();
}

LogisticProblem::LogisticProblem(LogisticData data, double lambda_r,
                                 const LogisticOptions& options)
    : Problem(data.dimension()), data_(std::move(data)), lambda_r_(lambda_r) {
  if (data_.size() < 2) throw InvalidProblem("logistic problem needs n >= 2");
  if (!(lambda_r >= 0.0) || !std::isfinite(lambda_r)) {
    throw InvalidProblem("lambda_r must be finite and nonnegative");
  }
  if (data_.features.cols() != data_.labels.size()) {
    throw InvalidProblem("feature/label count mismatch");
  }
  for (double y : data_.labels) {
    if (y != 1.0 && y != -1.0) throw InvalidProblem("labels must be +-1");
  }
  const double a_max = data_.features.colwise().norm().maxCoeff();
  const double smooth = 0.25 * a_max * a_max + lambda_r;
  if (!(smooth > 0.0)) {
    throw InvalidProblem("zero curvature: all features zero and lambda_r = 0");
  }

  if (options.radius) {
    radius_ = *options.radius;
  } else if (lambda_r > 0.0) {
    radius_ = std::max(a_max, 1.0) / lambda_r;
  } else {
    throw InvalidProblem("lambda_r = 0 needs an explicit certified radius");
  }
  if (!(radius_ > 0.0) || !std::isfinite(radius_)) {
    throw InvalidProblem("certified radius must be positive and finite");
  }
  rho_ = a_max * sigmoid(a_max * radius_) + lambda_r * radius_;
  loss_bound_ = log1pexp(a_max * radius_) + 0.5 * lambda_r * radius_ * radius_;

  // Provisional constants so value()/gradient() are usable during calibration.
  set_constants(smooth, smooth, 0.0);
  calibrate_optimum();
  estimate_pl_constant(options);
}

double LogisticProblem::value(const Vector& x) const {
  const Vector margins = data_.features.transpose() * x;
  double total = 0.0;
  for (Eigen::Index i = 0; i < margins.size(); ++i) {
    total += log1pexp(-data_.labels[i] * margins[i]);
  }
  return total / static_cast<double>(data_.size()) +
         0.5 * lambda_r_ * x.squaredNorm();
}

Vector LogisticProblem::gradient(const Vector& x) const {
  const Vector margins = data_.features.transpose() * x;
  Vector weights(margins.size());
  for (Eigen::Index i = 0; i < margins.size(); ++i) {
    const double y = data_.labels[i];
    weights[i] = -y * sigmoid(-y * margins[i]);
  }
  return data_.features * weights / static_cast<double>(data_.size()) +
         lambda_r_ * x;
}

double LogisticProblem::component_value(std::size_t i, const Vector& x) const {
  const auto k = static_cast<Eigen::Index>(i);
  return logistic_loss(x, data_.features.col(k), data_.labels[k], lambda_r_);
}

void LogisticProblem::add_component_gradient(std::size_t i, const Vector& x,
                                             double weight, Vector& out) const {
  const auto k = static_cast<Eigen::Index>(i);
  const auto a = data_.features.col(k);
  const double y = data_.labels[k];
  const double s = -y * sigmoid(-y * a.dot(x));
  out.noalias() += (weight * s) * a;
  out.noalias() += (weight * lambda_r_) * x;
}

double LogisticProblem::mean_loss(const Vector& x,
                                  const LogisticData& samples) const {
  const Vector margins = samples.features.transpose() * x;
  double total = 0.0;
  for (Eigen::Index i = 0; i < margins.size(); ++i) {
    total += log1pexp(-samples.labels[i] * margins[i]);
  }
  return total / static_cast<double>(samples.size()) +
         0.5 * lambda_r_ * x.squaredNorm();
}

void LogisticProblem::calibrate_optimum() {
  const int d = dimension();
  const double step = 1.0 / smoothness();
  Vector x = Vector::Zero(d);

  // Gradient-descent warm start, then damped Newton to reach the 1e-12
  // stationarity target in a bounded number of iterations.
  Vector g = gradient(x);
  for (int k = 0; k < 2000 && g.norm() > kStationarity; ++k) {
    x -= step * g;
    g = gradient(x);
  }
  for (int k = 0; k < 100 && g.norm() > kStationarity; ++k) {
    const Vector margins = data_.features.transpose() * x;
    Vector curvature(margins.size());
    for (Eigen::Index i = 0; i < margins.size(); ++i) {
      const double s = sigmoid(margins[i]);
      curvature[i] = s * (1.0 - s);
    }
    Matrix hessian = data_.features * curvature.asDiagonal() *
                     data_.features.transpose() /
                     static_cast<double>(data_.size());
    hessian.diagonal().array() += lambda_r_ + 1e-14;
    const Vector direction = hessian.ldlt().solve(g);
    const double f0 = value(x);
    const double slope = g.dot(direction);
    double t = 1.0;
    Vector trial = x - direction;
    while (value(trial) > f0 - 1e-4 * t * slope && t > 1e-12) {
      t *= 0.5;
      trial = x - t * direction;
    }
    x = trial;
    g = gradient(x);
    if (x.norm() > 1e8) {
      throw InvalidProblem("logistic objective has no finite minimizer");
    }
  }
  // Rounding floor for large n; anything worse is a genuine failure.
  if (g.norm() > 1e-9) {
    throw NumericError("optimum calibration stalled at |grad| = " +
                       std::to_string(g.norm()));
  }
  minimizer_ = x;
  set_constants(smoothness(), smoothness(), value(x));
}

void LogisticProblem::estimate_pl_constant(const LogisticOptions& options) {
  if (options.mu_override) {
    pilot_min_ratio_ = *options.mu_override / 0.9;
    set_constants(smoothness(), *options.mu_override, optimal_value());
    return;
  }
  if (options.pilot_points < 1) throw InvalidProblem("pilot_points < 1");
  CounterRng rng(options.pilot_seed, Purpose::kLandscape, 0, 0);
  const Vector center = reference_point();
  double min_ratio = std::numeric_limits<double>::infinity();
  for (int k = 0; k < options.pilot_points; ++k) {
    const Vector x = sample_in_ball(center, radius_, rng);
    const double gap_value = value(x) - optimal_value();
    if (gap_value <= 1e-10 * (1.0 + std::abs(optimal_value()))) continue;
    min_ratio =
        std::min(min_ratio, gradient(x).squaredNorm() / (2.0 * gap_value));
  }
  if (!std::isfinite(min_ratio) || !(min_ratio > 0.0)) {
    throw InvalidProblem("pilot sample produced no usable PL ratio");
  }
  pilot_min_ratio_ = min_ratio;
  set_constants(smoothness(), std::min(0.9 * min_ratio, smoothness()),
                optimal_value());
}

std::shared_ptr<const LogisticProblem> make_logistic(
    int n, int d, std::uint64_t data_seed, double lambda_r,
    const LogisticOptions& options) {
  if (n < 2) throw InvalidProblem("logistic problem needs n >= 2");
  if (d < 1) throw InvalidProblem("dimension must be positive");
  if (lambda_r < 0.0) throw InvalidProblem("lambda_r must be nonnegative");
  const LogisticDistribution dist(d, data_seed);
  return std::make_shared<LogisticProblem>(
      dist.sample(static_cast<std::size_t>(n), 0, 0), lambda_r, options);
}

std::shared_ptr<const LogisticProblem> make_neighbor(
    const LogisticProblem& base, std::size_t index,
    const Eigen::Ref<const Vector>& replacement_features,
    double replacement_label) {
  if (index >= base.component_count()) {
    throw InvalidArgument("neighbor index out of range");
  }
  LogisticData data = base.data();
  data.features.col(static_cast<Eigen::Index>(index)) = replacement_features;
  data.labels[static_cast<Eigen::Index>(index)] = replacement_label;
  LogisticOptions options;
  options.radius = base.radius();
  options.mu_override = base.pl_constant();
  return std::make_shared<LogisticProblem>(std::move(data), base.lambda_r(),
                                           options);
}

// ---------------------------------------------------------------------------
// Landscape checks

Vector sample_in_ball(const Vector& center, double radius, CounterRng& rng) {
  const auto d = center.size();
  Vector direction(d);
  double norm = 0.0;
  do {
    for (Eigen::Index i = 0; i < d; ++i) direction[i] = rng.normal();
    norm = direction.norm();
  } while (norm == 0.0);
  const double r =
      radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
  return center + (r / norm) * direction;
}

LandscapeReport check_landscape(const Problem& p, std::size_t n_points,
                                double radius, std::uint64_t seed) {
  if (n_points < 1) throw InvalidArgument("n_points must be >= 1");
  LandscapeReport report;
  report.points = n_points;
  report.pl_ratio_min = std::numeric_limits<double>::infinity();
  report.pl_ratio_max = 0.0;

  const double mu = p.pl_constant();
  const double smooth = p.smoothness();
  const double f_star = p.optimal_value();
  CounterRng rng(seed, Purpose::kLandscape, 1, 0);
  const Vector center = p.reference_point();

  Vector previous_x;
  Vector previous_grad;
  for (std::size_t k = 0; k < n_points; ++k) {
    const Vector x = sample_in_ball(center, radius, rng);
    const double f = p.value(x);
    const double gap_value = f - f_star;
    const Vector grad = p.gradient(x);
    const double grad_sq = grad.squaredNorm();
    const double slack = 1e-9 * (1.0 + std::abs(f));

    if (grad_sq < 2.0 * mu * gap_value - slack) ++report.pl_violations;
    if (grad_sq > 2.0 * smooth * gap_value + slack) ++report.upper_violations;
    if (gap_value > slack) {
      const double ratio = grad_sq / (2.0 * gap_value);
      report.pl_ratio_min = std::min(report.pl_ratio_min, ratio);
      report.pl_ratio_max = std::max(report.pl_ratio_max, ratio);
    }

    if (const auto projected = p.project_to_minimizers(x)) {
      const double dist_sq = (x - *projected).squaredNorm();
      if (dist_sq > (2.0 / mu) * gap_value + slack) ++report.qg_violations;
      if (gap_value > slack) {
        const double ratio = mu * dist_sq / (2.0 * gap_value);
        report.qg_ratio_max = std::max(report.qg_ratio_max.value_or(0.0), ratio);
      }
    }

    if (k > 0) {
      const double dx = (x - previous_x).norm();
      if (dx > 0.0) {
        const double ratio = (grad - previous_grad).norm() / dx;
        report.smoothness_ratio_max =
            std::max(report.smoothness_ratio_max, ratio);
        if (ratio > smooth * (1.0 + 1e-9) + 1e-12) {
          ++report.smoothness_violations;
        }
      }
    }
    previous_x = x;
    previous_grad = grad;
  }
  return report;
}

}  // namespace plsgd
