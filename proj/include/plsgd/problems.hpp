#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "plsgd/rng.hpp"
#include "plsgd/types.hpp"

namespace plsgd {

/// Finite-sum view f(x) = (1/n) sum_i f_i(x) of a problem.
class FiniteSum {
 public:
  virtual ~FiniteSum() = default;

  virtual std::size_t component_count() const = 0;
  virtual double component_value(std::size_t i, const Vector& x) const = 0;
  /// out += weight * grad f_i(x)
  virtual void add_component_gradient(std::size_t i, const Vector& x,
                                      double weight, Vector& out) const = 0;
  /// Smoothness constant shared by every component.
  virtual double component_smoothness() const = 0;
  /// Per-component Lipschitz constant rho on the certified iterate ball
  /// (infinity when the components are not globally Lipschitz there).
  virtual double lipschitz_bound() const = 0;
  /// Upper bound M on every component over the certified iterate ball.
  virtual double loss_bound() const = 0;
};

/// Smooth objective satisfying the PL inequality with constant mu <= L.
/// Instances are immutable after construction.
class Problem {
 public:
  virtual ~Problem() = default;

  virtual std::string_view kind() const = 0;
  virtual double value(const Vector& x) const = 0;
  virtual Vector gradient(const Vector& x) const = 0;

  virtual const FiniteSum* finite_sum() const { return nullptr; }

  /// Euclidean projection onto the minimizer set when it has a closed form.
  virtual std::optional<Vector> project_to_minimizers(const Vector&) const {
    return std::nullopt;
  }

  /// Natural center for sampling and default starting points.
  virtual Vector reference_point() const = 0;

  int dimension() const { return dimension_; }
  double smoothness() const { return smoothness_; }
  double pl_constant() const { return pl_constant_; }
  double optimal_value() const { return optimal_value_; }

  /// f(x) - f_star, with sub-rounding negatives clamped to zero.
  double gap(const Vector& x) const;

 protected:
  explicit Problem(int dimension) : dimension_(dimension) {}
  void set_constants(double smoothness, double pl_constant,
                     double optimal_value);

 private:
  int dimension_;
  double smoothness_ = 0.0;
  double pl_constant_ = 0.0;
  double optimal_value_ = 0.0;
};

/// Spectrum entries at or below this are treated as zero curvature for mu.
inline constexpr double kDegenerateEigenvalue = 1e-12;

/// f(x) = 1/2 (x - x*)^T diag(spectrum) (x - x*).
class QuadraticProblem final : public Problem, public FiniteSum {
 public:
  /// With `coordinate_split`, the problem also exposes the finite sum
  /// f_i(x) = (d/2) lambda_i (x_i - x*_i)^2, an interpolating decomposition.
  QuadraticProblem(Vector spectrum, Vector minimizer,
                   bool coordinate_split = false);

  std::string_view kind() const override { return "quadratic"; }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  const FiniteSum* finite_sum() const override {
    return coordinate_split_ ? this : nullptr;
  }
  std::optional<Vector> project_to_minimizers(const Vector& x) const override;
  Vector reference_point() const override { return minimizer_; }

  const Vector& spectrum() const { return spectrum_; }
  const Vector& minimizer() const { return minimizer_; }

  std::size_t component_count() const override;
  double component_value(std::size_t i, const Vector& x) const override;
  void add_component_gradient(std::size_t i, const Vector& x, double weight,
                              Vector& out) const override;
  double component_smoothness() const override;
  double lipschitz_bound() const override;
  double loss_bound() const override;

 private:
  Vector spectrum_;
  Vector minimizer_;
  bool coordinate_split_;
};

std::shared_ptr<const QuadraticProblem> make_quadratic(
    int d, const std::vector<double>& spectrum,
    const std::vector<double>& x_star, bool coordinate_split = false);

/// Labelled samples, one column of `features` per sample, labels in {-1, +1}.
struct LogisticData {
  Matrix features;
  Vector labels;

  std::size_t size() const { return static_cast<std::size_t>(labels.size()); }
  int dimension() const { return static_cast<int>(features.rows()); }
};

/// Planted linear model: features uniform on the unit sphere, labels
/// y = +1 with probability sigmoid(<w*, a>).
class LogisticDistribution {
 public:
  LogisticDistribution(int d, std::uint64_t seed, double planted_norm = 3.0);

  /// Draws `count` samples from the lane identified by (purpose, trial).
  LogisticData sample(std::size_t count, std::uint32_t lane,
                      std::uint32_t trial) const;

  int dimension() const { return dimension_; }
  const Vector& planted() const { return planted_; }
  std::uint64_t seed() const { return seed_; }

 private:
  int dimension_;
  std::uint64_t seed_;
  Vector planted_;
};

/// log(1 + exp(-y <a, x>)) + (lambda_r / 2) |x|^2 for one sample.
double logistic_loss(const Vector& x, const Eigen::Ref<const Vector>& a,
                     double y, double lambda_r);

struct LogisticOptions {
  /// Certified iterate-ball radius about the origin. When unset and
  /// lambda_r > 0 it defaults to max|a_i| / lambda_r, which bounds every
  /// SGD iterate started at the origin with steps eta <= 1/L.
  std::optional<double> radius;
  /// Pilot sample size for the empirical PL constant.
  int pilot_points = 20000;
  /// Skips the pilot estimate and uses this PL constant instead.
  std::optional<double> mu_override;
  std::uint64_t pilot_seed = 0x5eed;
};

/// Regularized logistic empirical risk over a fixed dataset.
class LogisticProblem final : public Problem, public FiniteSum {
 public:
  LogisticProblem(LogisticData data, double lambda_r,
                  const LogisticOptions& options = {});

  std::string_view kind() const override { return "logistic"; }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  const FiniteSum* finite_sum() const override { return this; }
  Vector reference_point() const override {
    return Vector::Zero(dimension());
  }

  std::size_t component_count() const override { return data_.size(); }
  double component_value(std::size_t i, const Vector& x) const override;
  void add_component_gradient(std::size_t i, const Vector& x, double weight,
                              Vector& out) const override;
  double component_smoothness() const override { return smoothness(); }
  double lipschitz_bound() const override { return rho_; }
  double loss_bound() const override { return loss_bound_; }

  const LogisticData& data() const { return data_; }
  double lambda_r() const { return lambda_r_; }
  double radius() const { return radius_; }
  const Vector& minimizer() const { return minimizer_; }
  /// Smallest PL ratio seen in the pilot sample (before the 0.9 shrink).
  double pilot_min_ratio() const { return pilot_min_ratio_; }

  /// Mean loss of x over an arbitrary sample set (e.g. held-out data).
  double mean_loss(const Vector& x, const LogisticData& samples) const;

 private:
  void calibrate_optimum();
  void estimate_pl_constant(const LogisticOptions& options);

  LogisticData data_;
  double lambda_r_;
  double radius_ = 0.0;
  double rho_ = 0.0;
  double loss_bound_ = 0.0;
  double pilot_min_ratio_ = 0.0;
  Vector minimizer_;
};

std::shared_ptr<const LogisticProblem> make_logistic(
    int n, int d, std::uint64_t data_seed, double lambda_r,
    const LogisticOptions& options = {});

/// Copy of `base` with sample `index` replaced by `replacement`.
std::shared_ptr<const LogisticProblem> make_neighbor(
    const LogisticProblem& base, std::size_t index,
    const Eigen::Ref<const Vector>& replacement_features,
    double replacement_label);

struct LandscapeReport {
  std::size_t points = 0;
  /// |grad f|^2 / (2 (f - f*)), expected within [mu, L].
  double pl_ratio_min = 0.0;
  double pl_ratio_max = 0.0;
  /// |grad f(x) - grad f(y)| / |x - y| over consecutive sample pairs.
  double smoothness_ratio_max = 0.0;
  /// mu |x - P(x)|^2 / (2 (f - f*)), expected <= 1; empty without projection.
  std::optional<double> qg_ratio_max;
  std::size_t pl_violations = 0;
  std::size_t upper_violations = 0;
  std::size_t smoothness_violations = 0;
  std::size_t qg_violations = 0;

  std::size_t total_violations() const {
    return pl_violations + upper_violations + smoothness_violations +
           qg_violations;
  }
};

/// Samples points uniformly in the ball of `radius` about the problem's
/// reference point and checks PL, the smoothness upper bound, the Lipschitz
/// gradient ratio, and quadratic growth (tolerance 1e-9 relative).
LandscapeReport check_landscape(const Problem& p, std::size_t n_points,
                                double radius, std::uint64_t seed);

/// Uniform point in the ball of `radius` about `center`.
Vector sample_in_ball(const Vector& center, double radius, CounterRng& rng);

}  // namespace plsgd
