#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "plsgd/counterexample.hpp"
#include "plsgd/oracles.hpp"
#include "plsgd/optimizer.hpp"

namespace plsgd {

enum class ExperimentKind { kEnsemble, kCoupled, kRisk, kCounterexample, kLandscape };

std::string_view to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(std::string_view name);

struct ProblemSpec {
  std::string type = "quadratic";  ///< quadratic | logistic
  int d = 10;
  // quadratic
  std::vector<double> spectrum;  ///< empty: evenly spaced on [mu, L]
  double mu = 1.0;
  double L = 1.0;
  double x0_distance = 1.0;
  bool coordinate_split = false;
  // logistic
  std::int64_t n = 100;
  double lambda_r = 0.1;
  std::uint64_t data_seed = 1;
  std::optional<double> radius;
  std::int64_t pilot_points = 20000;
  std::optional<double> mu_override;

  bool operator==(const ProblemSpec&) const = default;
};

struct OracleSpec {
  std::string mode = "additive_gaussian";
  double sigma = 1.0;
  std::uint32_t b = 1;

  bool operator==(const OracleSpec&) const = default;
};

struct ScheduleSpec {
  std::string kind = "theta";
  /// slow, stability. For coupled runs 0 means 1/L of the built problem.
  double c = 0.0;
  double eta = 0.0;

  bool operator==(const ScheduleSpec&) const = default;
};

struct CoupledSpec {
  std::uint64_t replicates = 1000;
  std::int64_t index = 0;
  std::int64_t fresh_samples = 1000;

  bool operator==(const CoupledSpec&) const = default;
};

struct RiskSettings {
  std::vector<double> multipliers{0.0, 0.25, 1.0, 4.0};
  std::uint64_t replicates = 200;
  double delta = 0.1;
  std::int64_t heldout = 100000;
  std::int64_t max_T = 200000;

  bool operator==(const RiskSettings&) const = default;
};

struct CounterexampleSettings {
  double a = 1.0;
  double b = 1.0;
  double c = 1.0;
  double start_x = 2.0;
  double epsilon = 0.25;
  std::int64_t order = 16;
  std::optional<double> radius;  ///< empty: distance to the minimizer set - 1e-6
  double eta = 0.4;

  bool operator==(const CounterexampleSettings&) const = default;
};

struct LandscapeSettings {
  std::int64_t points = 2000;
  double radius = 1.0;

  bool operator==(const LandscapeSettings&) const = default;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kEnsemble;
  std::uint64_t seed = 0;
  std::int64_t T = 1000;
  std::uint64_t N = 1000;
  std::vector<double> deltas{0.1, 0.05, 0.01};
  double C1 = 2.0;
  double C2 = 2.0;
  std::int64_t trajectory_trials = 10;
  std::string output;  ///< optional output directory
  ProblemSpec problem;
  OracleSpec oracle;
  ScheduleSpec schedule;
  CoupledSpec coupled;
  RiskSettings risk;
  CounterexampleSettings counterexample;
  LandscapeSettings landscape;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Parses and validates a config. Unknown keys, missing required keys, type
/// mismatches, and constraint violations throw ConfigError naming the key.
ExperimentConfig parse_config_text(std::string_view text);
ExperimentConfig parse_config(const std::filesystem::path& path);

/// Canonical TOML; parse_config_text(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& config);

/// Throws ConfigError when cross-field constraints fail.
void validate_config(const ExperimentConfig& config);

/// Smoothness implied by the problem spec without building the problem
/// (quadratic: max spectrum; logistic: 1/4 + lambda_r for unit features).
double implied_smoothness(const ProblemSpec& spec);

/// Quadratic spectrum after defaulting.
std::vector<double> resolved_spectrum(const ProblemSpec& spec);

CounterexampleSpec counterexample_spec(const CounterexampleSettings& s);

}  // namespace plsgd
