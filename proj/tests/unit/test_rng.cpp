#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "penref/rng.hpp"

namespace penref {
namespace {

// Random123 known-answer vectors for Philox4x32-10.
TEST(Philox, KnownAnswerZero) {
  const auto out = philox4x32({0, 0, 0, 0}, 0);
  EXPECT_EQ(out[0], 0x6627e8d5u);
  EXPECT_EQ(out[1], 0xe169c58du);
  EXPECT_EQ(out[2], 0xbc57ac4cu);
  EXPECT_EQ(out[3], 0x9b00dbd8u);
}

TEST(Philox, KnownAnswerOnes) {
  const auto out = philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                              0xffffffffffffffffULL);
  EXPECT_EQ(out[0], 0x408f276du);
  EXPECT_EQ(out[1], 0x41c83b0eu);
  EXPECT_EQ(out[2], 0xa20bc7c6u);
  EXPECT_EQ(out[3], 0x6d5451fdu);
}

TEST(Philox, KnownAnswerPi) {
  const auto out = philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                              (std::uint64_t{0x299f31d0u} << 32) | 0xa4093822u);
  EXPECT_EQ(out[0], 0xd16cfe09u);
  EXPECT_EQ(out[1], 0x94fdccebu);
  EXPECT_EQ(out[2], 0x5001e420u);
  EXPECT_EQ(out[3], 0x24126ea1u);
}

TEST(DeriveSeed, DistinctAcrossIndices) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 10000; ++i) seen.insert(derive_seed(42, i));
  EXPECT_EQ(seen.size(), 10000u);
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
}

TEST(UnitOpen, NeverHitsEndpoints) {
  EXPECT_GT(to_unit_open(0), 0.0);
  EXPECT_LT(to_unit_open(~std::uint64_t{0}), 1.0);
}

TEST(Gaussian, MomentsOfPairs) {
  const int n = 200000;
  double s1 = 0, s2 = 0, s4 = 0, cross = 0;
  for (int i = 0; i < n / 2; ++i) {
    const auto g = gaussian_pair(99, static_cast<std::uint32_t>(i), 0, 0);
    for (double v : g) {
      s1 += v;
      s2 += v * v;
      s4 += v * v * v * v;
    }
    cross += g[0] * g[1];
  }
  EXPECT_NEAR(s1 / n, 0.0, 4.0 / std::sqrt(n));
  EXPECT_NEAR(s2 / n, 1.0, 4.0 * std::sqrt(2.0 / n));
  EXPECT_NEAR(s4 / n, 3.0, 4.0 * std::sqrt(96.0 / n));
  EXPECT_NEAR(cross / (n / 2), 0.0, 4.0 / std::sqrt(n / 2));
}

TEST(RandomStream, DeterministicAndUniform) {
  RandomStream a(5), b(5);
  double sum = 0;
  for (int i = 0; i < 10000; ++i) {
    const double u = a.uniform();
    EXPECT_EQ(u, b.uniform());
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 10000, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / 10000));
}

}  // namespace
}  // namespace penref
