#include <gtest/gtest.h>

#include <random>

#include "stratevo/rng.hpp"

namespace stratevo {
namespace {

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, FollowsMt19937_64) {
  std::mt19937_64 reference(9);
  Rng r(9);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(r.next_u64(), reference());
}

TEST(Rng, UniformUsesTop53Bits) {
  std::mt19937_64 reference(3);
  Rng r(3);
  for (int i = 0; i < 100; ++i) {
    const double expected = static_cast<double>(reference() >> 11) / 9007199254740992.0;
    const double u = r.uniform();
    ASSERT_EQ(u, expected);
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Rng, IndexStaysInRangeAndCoversIt) {
  Rng r(5);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 7000; ++i) {
    const std::size_t k = r.index(7);
    ASSERT_LT(k, 7u);
    ++hits[k];
  }
  for (int h : hits) EXPECT_GT(h, 800);
}

TEST(Rng, IndexOfOneConsumesNothing) {
  Rng r(1);
  EXPECT_EQ(r.index(1), 0u);
  EXPECT_EQ(r.draws(), 0u);
}

TEST(Rng, CountsDraws) {
  Rng r(11);
  r.uniform();
  r.next_u64();
  r.index(3);
  EXPECT_GE(r.draws(), 3u);
}

TEST(Rng, RestoreContinuesTheStream) {
  Rng a(77);
  for (int i = 0; i < 37; ++i) a.index(10);
  Rng b;
  b.restore(77, a.draws());
  EXPECT_EQ(b.draws(), a.draws());
  for (int i = 0; i < 100; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
}

}  // namespace
}  // namespace stratevo
