#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "plsgd/envelopes.hpp"
#include "plsgd/experiments.hpp"
#include "plsgd/optimizer.hpp"

namespace plsgd {

/// Shortest decimal that round-trips to the same double.
std::string format_number(double v);

/// Column suffix for a confidence level: 0.1 -> "d10", 0.05 -> "d05".
std::string delta_label(double delta);

/// Writes to a sibling temporary file and renames it into place, so readers
/// never observe a partial file.
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content);

/// trial_id, t, gap, grad_norm_sq, eta, radius, inner, err_norm_sq
std::string trajectory_csv(const std::vector<Trajectory>& trajectories);

/// t, K_t, env_<delta>..., expected_bound, closedform_K_t
std::string bounds_csv(const BoundReport& report);

/// t, mean, q50, q90, q95, q99, env_<delta>..., exceed_<delta>..., mgf_stat,
/// expected_bound
std::string ensemble_summary_csv(const EnsembleStats& stats);

/// t, mean (every step)
std::string mean_gap_csv(const EnsembleStats& stats);

/// t, delta_mean, delta_max, violations
std::string coupled_csv(const CoupledStats& stats);

/// multiplier, T, c, F_est, f_est, gap, conv_bound, gen_bound,
/// combined_bound, exceed_frac
std::string risk_csv(const std::vector<RiskReport>& reports);

/// t, x, y, value
std::string projected_csv(const ProjectedRun& run);

}  // namespace plsgd
