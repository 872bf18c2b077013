#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace plsgd {

/// Philox4x32-10 block function (Salmon et al., "Parallel random numbers: as
/// easy as 1, 2, 3"). Maps a 128-bit counter and 64-bit key to 128 bits.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Draw purposes. Each purpose gets its own counter lane so that, e.g., the
/// minibatch index stream of a trial never shares bits with its noise stream.
enum class Purpose : std::uint32_t {
  kNoise = 1,
  kMinibatch = 2,
  kData = 3,
  kLandscape = 4,
  kReplicate = 5,
  kProbe = 6,
};

/// Counter-based stream keyed by (seed, purpose, trial, step). Draws are a pure
/// function of those four values plus the draw index, so any (trial, step)
/// cell can be regenerated independently on any thread.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, Purpose purpose, std::uint32_t trial,
             std::uint32_t step);

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform();

  /// Standard normal via Box-Muller; the second variate is cached.
  double normal();

  /// Uniform integer in [0, bound] (inclusive) without modulo bias.
  std::uint64_t uniform_index(std::uint64_t bound);

 private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> counter_;
  std::array<std::uint32_t, 4> block_{};
  int used_ = 4;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

/// Uniform b-subset of {0, ..., n-1} without replacement (Floyd's algorithm),
/// returned in ascending order.
std::vector<std::uint32_t> sample_subset(std::uint32_t n, std::uint32_t b,
                                         CounterRng& rng);

}  // namespace plsgd
