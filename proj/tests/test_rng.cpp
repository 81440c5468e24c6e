#include <gtest/gtest.h>

#include <cmath>

#include "quadloco/rng.hpp"

using quadloco::Rng;

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, DifferentSeedsDiffer) {
  Rng a(1), b(2);
  int same = 0;
  for (int i = 0; i < 100; ++i) same += (a.next_u64() == b.next_u64());
  EXPECT_EQ(same, 0);
}

TEST(Rng, SplitIsDeterministicAndIndependent) {
  Rng root(7);
  Rng a1 = root.split(1), a2 = root.split(1), b = root.split(2);
  EXPECT_EQ(a1.next_u64(), a2.next_u64());
  Rng a3 = root.split(1);
  int same = 0;
  for (int i = 0; i < 100; ++i) same += (a3.next_u64() == b.next_u64());
  EXPECT_EQ(same, 0);
}

TEST(Rng, SplitDoesNotAdvanceParent) {
  Rng a(9), b(9);
  (void)a.split(3);
  EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, UniformRangeAndSpread) {
  Rng r(123);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 10000; ++i) {
    double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  EXPECT_LT(lo, 0.01);
  EXPECT_GT(hi, 0.99);
}

TEST(Rng, UniformIntInclusiveBounds) {
  Rng r(5);
  bool saw_lo = false, saw_hi = false;
  for (int i = 0; i < 1000; ++i) {
    int v = r.uniform_int(-2, 3);
    ASSERT_GE(v, -2);
    ASSERT_LE(v, 3);
    saw_lo |= (v == -2);
    saw_hi |= (v == 3);
  }
  EXPECT_TRUE(saw_lo);
  EXPECT_TRUE(saw_hi);
}

TEST(Rng, NormalMoments) {
  Rng r(99);
  const int n = 100000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    double x = r.normal();
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  EXPECT_NEAR(mean, 0.0, 0.02);
  EXPECT_NEAR(var, 1.0, 0.03);
}

TEST(Rng, HashUniformDeterministicInRange) {
  for (std::uint64_t a = 0; a < 50; ++a) {
    double u = quadloco::hash_uniform(a, 17, 3);
    EXPECT_EQ(u, quadloco::hash_uniform(a, 17, 3));
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
  EXPECT_NE(quadloco::hash_uniform(1, 2, 3), quadloco::hash_uniform(2, 1, 3));
}
