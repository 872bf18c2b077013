#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "plsgd/problems.hpp"
#include "plsgd/types.hpp"

namespace plsgd {

enum class OracleMode {
  /// grad f(x) - g(x, b) isotropic normal, per-coordinate sd sigma / sqrt(d b).
  kAdditiveGaussian,
  /// Mean of b iid vectors with coordinates uniform on a symmetric interval
  /// of per-coordinate sd sigma / sqrt(d).
  kAdditiveBounded,
  /// Mean of component gradients over a uniform b-subset of [n].
  kFiniteSumSubsample,
};

std::string_view to_string(OracleMode mode);
OracleMode oracle_mode_from_string(std::string_view name);

/// Stochastic gradient source. `sigma / sqrt(d)` is the declared
/// sub-gaussian parameter of grad f(x) - g(x, 1); `stream` keys the
/// counter-based generator.
struct GradientOracle {
  OracleMode mode = OracleMode::kAdditiveGaussian;
  double sigma = 0.0;
  std::uint32_t batch = 1;
  std::uint64_t stream = 0;
};

struct GradientSample {
  Vector gradient;       ///< g_t
  Vector error;          ///< e_t = grad f(x) - g_t
  Vector true_gradient;  ///< grad f(x)
};

/// Draws g(x_t, b). The draw is a pure function of (oracle.stream, trial, t).
GradientSample sample_gradient(const GradientOracle& oracle, const Problem& p,
                               const Vector& x, std::uint32_t trial,
                               std::uint32_t t);

/// Minibatch index set I_t for (stream, trial, t). Two runs that share the
/// stream and trial see identical index sets, which is the coupling used by
/// the stability experiments.
std::vector<std::uint32_t> minibatch_indices(std::uint32_t n, std::uint32_t b,
                                             std::uint64_t stream,
                                             std::uint32_t trial,
                                             std::uint32_t t);

struct CoupledDraw {
  std::vector<std::uint32_t> indices;
  bool hit = false;  ///< i_star is in the batch
};

CoupledDraw coupled_indices(std::uint32_t n, std::uint32_t b,
                            std::uint32_t i_star, std::uint32_t t,
                            std::uint64_t stream, std::uint32_t trial = 0);

}  // namespace plsgd
