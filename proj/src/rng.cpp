#include "plsgd/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "plsgd/errors.hpp"

namespace plsgd {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(product >> 32);
  lo = static_cast<std::uint32_t>(product);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

CounterRng::CounterRng(std::uint64_t seed, Purpose purpose, std::uint32_t trial,
                       std::uint32_t step)
    : key_{static_cast<std::uint32_t>(seed),
           static_cast<std::uint32_t>(seed >> 32)},
      counter_{0u, step, trial, static_cast<std::uint32_t>(purpose)} {}

void CounterRng::refill() {
  block_ = philox4x32(counter_, key_);
  ++counter_[0];
  used_ = 0;
}

std::uint32_t CounterRng::next_u32() {
  if (used_ == 4) refill();
  return block_[used_++];
}

std::uint64_t CounterRng::next_u64() {
  const std::uint64_t hi = next_u32();
  const std::uint64_t lo = next_u32();
  return (hi << 32) | lo;
}

double CounterRng::uniform() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_normal_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

std::uint64_t CounterRng::uniform_index(std::uint64_t bound) {
  if (bound == 0) return 0;
  if (bound == UINT64_MAX) return next_u64();
  const std::uint64_t range = bound + 1;
  // Lemire's multiply-shift with rejection of the short final bucket.
  const std::uint64_t threshold = (0 - range) % range;
  for (;;) {
    __extension__ using u128 = unsigned __int128;
    const u128 m = static_cast<u128>(next_u64()) * range;
    if (static_cast<std::uint64_t>(m) >= threshold) {
      return static_cast<std::uint64_t>(m >> 64);
    }
  }
}

std::vector<std::uint32_t> sample_subset(std::uint32_t n, std::uint32_t b,
                                         CounterRng& rng) {
  if (b == 0 || b > n) {
    throw InvalidBatch("subset size " + std::to_string(b) +
                       " outside [1, " + std::to_string(n) + "]");
  }
  std::vector<std::uint32_t> chosen;
  chosen.reserve(b);
  // Small batches: linear membership scan. Large: a presence mask over [n].
  std::vector<char> mask;
  if (b > 32) mask.assign(n, 0);
  for (std::uint32_t j = n - b; j < n; ++j) {
    const auto t = static_cast<std::uint32_t>(rng.uniform_index(j));
    const bool taken =
        mask.empty() ? std::find(chosen.begin(), chosen.end(), t) != chosen.end()
                     : mask[t] != 0;
    const std::uint32_t pick = taken ? j : t;
    chosen.push_back(pick);
    if (!mask.empty()) mask[pick] = 1;
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

}  // namespace plsgd
