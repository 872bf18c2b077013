#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

#include "plsgd/rng.hpp"

using namespace plsgd;

// Published known-answer vectors for Philox4x32-10.
TEST(Philox, KnownAnswerVectors) {
  using Block = std::array<std::uint32_t, 4>;
  EXPECT_EQ(philox4x32({0, 0, 0, 0}, {0, 0}),
            (Block{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
  EXPECT_EQ(philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                       {0xffffffffu, 0xffffffffu}),
            (Block{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
  EXPECT_EQ(philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                       {0xa4093822u, 0x299f31d0u}),
            (Block{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(CounterRng, SameCellReproducesBitForBit) {
  CounterRng a(123, Purpose::kNoise, 4, 17);
  CounterRng b(123, Purpose::kNoise, 4, 17);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u32(), b.next_u32());
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.normal(), b.normal());
}

TEST(CounterRng, DistinctCellsDiffer) {
  const auto first = [](std::uint64_t seed, Purpose p, std::uint32_t trial,
                        std::uint32_t step) {
    CounterRng r(seed, p, trial, step);
    return r.next_u64();
  };
  std::set<std::uint64_t> seen{
      first(1, Purpose::kNoise, 0, 0),     first(2, Purpose::kNoise, 0, 0),
      first(1, Purpose::kMinibatch, 0, 0), first(1, Purpose::kNoise, 1, 0),
      first(1, Purpose::kNoise, 0, 1),     first(1ull << 40, Purpose::kNoise, 0, 0)};
  EXPECT_EQ(seen.size(), 6u);
}

TEST(CounterRng, UniformMomentsAndRange) {
  CounterRng r(9, Purpose::kProbe, 0, 0);
  const int n = 400000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    sq += u * u;
  }
  EXPECT_NEAR(sum / n, 0.5, 5 * std::sqrt(1.0 / 12 / n));
  EXPECT_NEAR(sq / n - (sum / n) * (sum / n), 1.0 / 12.0, 2e-3);
}

TEST(CounterRng, NormalMoments) {
  CounterRng r(10, Purpose::kProbe, 0, 0);
  const int n = 400000;
  double m1 = 0, m2 = 0, m4 = 0;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    m1 += z;
    m2 += z * z;
    m4 += z * z * z * z;
  }
  EXPECT_NEAR(m1 / n, 0.0, 5.0 / std::sqrt(n));
  EXPECT_NEAR(m2 / n, 1.0, 5.0 * std::sqrt(2.0 / n));
  EXPECT_NEAR(m4 / n, 3.0, 5.0 * std::sqrt(96.0 / n));
}

TEST(CounterRng, UniformIndexCoversInclusiveRange) {
  CounterRng r(11, Purpose::kProbe, 0, 0);
  std::map<std::uint64_t, int> counts;
  const int n = 70000;
  for (int i = 0; i < n; ++i) ++counts[r.uniform_index(6)];
  ASSERT_EQ(counts.size(), 7u);
  for (const auto& [k, c] : counts) {
    EXPECT_LE(k, 6u);
    EXPECT_NEAR(c, n / 7.0, 5 * std::sqrt(n / 7.0));
  }
  EXPECT_EQ(r.uniform_index(0), 0u);
}

TEST(SampleSubset, SortedDistinctWithinRange) {
  CounterRng r(12, Purpose::kMinibatch, 0, 0);
  for (int rep = 0; rep < 1000; ++rep) {
    const auto s = sample_subset(20, 7, r);
    ASSERT_EQ(s.size(), 7u);
    for (std::size_t i = 1; i < s.size(); ++i) ASSERT_LT(s[i - 1], s[i]);
    ASSERT_LT(s.back(), 20u);
  }
  EXPECT_EQ(sample_subset(5, 5, r), (std::vector<std::uint32_t>{0, 1, 2, 3, 4}));
}

TEST(SampleSubset, EverySubsetEquallyLikely) {
  // n = 6, b = 2: 15 subsets.
  CounterRng r(13, Purpose::kMinibatch, 0, 0);
  std::map<std::vector<std::uint32_t>, int> counts;
  const int n = 150000;
  for (int i = 0; i < n; ++i) ++counts[sample_subset(6, 2, r)];
  ASSERT_EQ(counts.size(), 15u);
  const double p = 1.0 / 15.0;
  for (const auto& [s, c] : counts)
    EXPECT_NEAR(c, n * p, 4.5 * std::sqrt(n * p * (1 - p)));
}
