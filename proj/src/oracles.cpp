#include "plsgd/oracles.hpp"

#include <cmath>
#include <string>

#include "plsgd/errors.hpp"
#include "plsgd/rng.hpp"

namespace plsgd {

std::string_view to_string(OracleMode mode) {
  switch (mode) {
    case OracleMode::kAdditiveGaussian:
      return "additive_gaussian";
    case OracleMode::kAdditiveBounded:
      return "additive_bounded";
    case OracleMode::kFiniteSumSubsample:
      return "finite_sum_subsample";
  }
  return "unknown";
}

OracleMode oracle_mode_from_string(std::string_view name) {
  if (name == "additive_gaussian") return OracleMode::kAdditiveGaussian;
  if (name == "additive_bounded") return OracleMode::kAdditiveBounded;
  if (name == "finite_sum_subsample") return OracleMode::kFiniteSumSubsample;
  throw InvalidArgument("unknown oracle mode '" + std::string(name) + "'");
}

std::vector<std::uint32_t> minibatch_indices(std::uint32_t n, std::uint32_t b,
                                             std::uint64_t stream,
                                             std::uint32_t trial,
                                             std::uint32_t t) {
  if (b < 1 || b > n) {
    throw InvalidBatch("batch " + std::to_string(b) + " not in [1, " +
                       std::to_string(n) + "]");
  }
  CounterRng rng(stream, Purpose::kMinibatch, trial, t);
  return sample_subset(n, b, rng);
}

CoupledDraw coupled_indices(std::uint32_t n, std::uint32_t b,
                            std::uint32_t i_star, std::uint32_t t,
                            std::uint64_t stream, std::uint32_t trial) {
  if (i_star >= n) throw InvalidArgument("i_star outside [0, n)");
  CoupledDraw draw;
  draw.indices = minibatch_indices(n, b, stream, trial, t);
  for (auto i : draw.indices) {
    if (i == i_star) draw.hit = true;
  }
  return draw;
}

GradientSample sample_gradient(const GradientOracle& oracle, const Problem& p,
                               const Vector& x, std::uint32_t trial,
                               std::uint32_t t) {
  const int d = p.dimension();
  if (x.size() != d) throw InvalidArgument("dimension mismatch in oracle");
  if (oracle.batch < 1) throw InvalidBatch("batch must be >= 1");
  if (!(oracle.sigma >= 0.0)) throw InvalidArgument("sigma must be >= 0");

  GradientSample out;
  Vector full = p.gradient(x);

  switch (oracle.mode) {
    case OracleMode::kAdditiveGaussian: {
      out.error = Vector::Zero(d);
      if (oracle.sigma > 0.0) {
        CounterRng rng(oracle.stream, Purpose::kNoise, trial, t);
        const double sd =
            oracle.sigma / std::sqrt(static_cast<double>(d) * oracle.batch);
        for (int i = 0; i < d; ++i) out.error[i] = sd * rng.normal();
      }
      break;
    }
    case OracleMode::kAdditiveBounded: {
      out.error = Vector::Zero(d);
      if (oracle.sigma > 0.0) {
        CounterRng rng(oracle.stream, Purpose::kNoise, trial, t);
        // Uniform on [-h, h] has sd h / sqrt(3).
        const double half_width =
            oracle.sigma * std::sqrt(3.0 / static_cast<double>(d));
        for (std::uint32_t k = 0; k < oracle.batch; ++k) {
          for (int i = 0; i < d; ++i) {
            out.error[i] += half_width * (2.0 * rng.uniform() - 1.0);
          }
        }
        out.error /= static_cast<double>(oracle.batch);
      }
      break;
    }
    case OracleMode::kFiniteSumSubsample: {
      const FiniteSum* sum = p.finite_sum();
      if (sum == nullptr) {
        throw InvalidArgument("finite_sum_subsample needs a finite-sum problem");
      }
      const auto n = static_cast<std::uint32_t>(sum->component_count());
      const auto batch = minibatch_indices(n, oracle.batch, oracle.stream, trial, t);
      out.gradient = Vector::Zero(d);
      const double weight = 1.0 / static_cast<double>(oracle.batch);
      for (auto i : batch) sum->add_component_gradient(i, x, weight, out.gradient);
      out.error = full - out.gradient;
      out.true_gradient = std::move(full);
      return out;
    }
  }
  out.gradient = full - out.error;
  out.true_gradient = std::move(full);
  return out;
}

}  // namespace plsgd
