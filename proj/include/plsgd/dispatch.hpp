#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "plsgd/config.hpp"
#include "plsgd/problems.hpp"

namespace plsgd {

/// One bound-vs-measurement comparison; passes when measured <= bound.
struct Check {
  std::string name;
  double measured = 0.0;
  double bound = 0.0;
  bool pass = false;
};

struct RunOutcome {
  int exit_code = 0;  ///< 0 when every check passes, 2 otherwise
  std::vector<Check> checks;
  std::vector<std::string> failures;  ///< names of failed checks
  std::filesystem::path directory;
  std::vector<std::string> files;     ///< written, relative to directory
};

/// Exit status for configuration and usage errors.
inline constexpr int kExitConfigError = 1;
/// Exit status when an in-run invariant check fails.
inline constexpr int kExitInvariantFailure = 2;

/// Version string baked in at configure time (git describe, or the project
/// version outside a checkout).
std::string version_string();

std::shared_ptr<const Problem> build_problem(const ProblemSpec& spec);
StepSchedule build_schedule(const ScheduleSpec& spec, const Problem& p);

/// Runs the experiment and writes its CSVs plus manifest.json into
/// `directory` (created if needed). Nothing is written if the run throws.
RunOutcome run_experiment(const ExperimentConfig& config,
                          const std::filesystem::path& directory,
                          unsigned threads = 0);

/// Plain-text bound-vs-measurement table from a run's manifest.json.
std::string render_report(const std::filesystem::path& run_directory);

}  // namespace plsgd
