#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "oracles.hpp"
#include "pathlift/rng.hpp"

using namespace pathlift;

TEST(Philox, KnownAnswerVectors) {
  for (const auto& v : oracle::kPhiloxVectors) {
    const auto out = philox4x32({v.ctr[0], v.ctr[1], v.ctr[2], v.ctr[3]}, {v.key[0], v.key[1]});
    for (int i = 0; i < 4; ++i) EXPECT_EQ(out[i], v.out[i]);
  }
}

TEST(CounterRng, PureFunctionOfSeedStreamCounter) {
  const CounterRng a(42, 3), b(42, 3), c(42, 4), d(43, 3);
  EXPECT_EQ(a.normal(17), b.normal(17));
  EXPECT_NE(a.normal(17), c.normal(17));
  EXPECT_NE(a.normal(17), d.normal(17));
  EXPECT_NE(a.normal(17, 0), a.normal(17, 1));
}

TEST(CounterRng, UniformOpenIntervalAndMoments) {
  const CounterRng r(7, 0);
  double s = 0, s2 = 0, n4 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform(i);
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    const double z = r.normal(i, 1);
    s += z;
    s2 += z * z;
    n4 += z * z * z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.01);
  EXPECT_NEAR(n4 / n, 3.0, 0.06);
}

TEST(CounterRng, BelowStaysInRange) {
  const CounterRng r(1, 1);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    const auto v = r.below(7, i);
    ASSERT_LT(v, 7u);
    seen.insert(v);
  }
  EXPECT_EQ(seen.size(), 7u);
}

TEST(DeriveSeed, DistinctAndStable) {
  std::set<std::uint64_t> seeds;
  for (std::uint64_t i = 0; i < 1000; ++i) seeds.insert(derive_seed(99, i));
  EXPECT_EQ(seeds.size(), 1000u);
  EXPECT_EQ(derive_seed(99, 5), derive_seed(99, 5));
  EXPECT_NE(derive_seed(99, 5), derive_seed(100, 5));
}
