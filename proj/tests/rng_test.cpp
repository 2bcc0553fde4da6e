#include "core/rng.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <gtest/gtest.h>

namespace authdrift {
namespace {

TEST(RngTest, SameSeedSameStream) {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.Next();
    EXPECT_EQ(x, b.Next());
    differs |= x != c.Next();
  }
  EXPECT_TRUE(differs);
}

TEST(RngTest, DeriveSeedSeparatesStreams) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 1000; ++s) seen.insert(DeriveSeed(17, s));
  EXPECT_EQ(seen.size(), 1000u);
  EXPECT_NE(DeriveSeed(17, "train"), DeriveSeed(17, "test"));
  EXPECT_NE(DeriveSeed(17, "train"), DeriveSeed(18, "train"));
  EXPECT_EQ(DeriveSeed(17, "train"), DeriveSeed(17, "train"));
}

TEST(RngTest, BelowStaysInRangeAndIsRoughlyUniform) {
  Rng rng(7);
  constexpr int kBins = 7;
  constexpr int kDraws = 70000;
  std::array<int, kBins> counts{};
  for (int i = 0; i < kDraws; ++i) {
    const auto v = rng.Below(kBins);
    ASSERT_LT(v, static_cast<std::uint64_t>(kBins));
    ++counts[v];
  }
  // Chi-square with 6 dof; 22.46 is the 0.999 quantile.
  double chi2 = 0.0;
  const double expected = static_cast<double>(kDraws) / kBins;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  EXPECT_LT(chi2, 22.46);
}

TEST(RngTest, Uniform01InHalfOpenInterval) {
  Rng rng(3);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.Uniform01();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100000, 0.5, 0.01);
}

TEST(RngTest, NormalMoments) {
  Rng rng(5);
  double sum = 0.0, sq = 0.0;
  constexpr int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.Normal();
    sum += x;
    sq += x * x;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sq / n, 1.0, 0.02);
}

TEST(RngTest, ShuffleIsAPermutation) {
  Rng rng(11);
  std::vector<int> v(50);
  for (int i = 0; i < 50; ++i) v[i] = i;
  auto w = v;
  rng.Shuffle(w);
  EXPECT_NE(v, w);
  std::sort(w.begin(), w.end());
  EXPECT_EQ(v, w);
}

TEST(SampleSubsetTest, DistinctInRangeAndScratchRestored) {
  Rng rng(1);
  std::vector<std::uint8_t> scratch(30, 0);
  for (std::uint32_t k = 0; k <= 30; ++k) {
    const auto s = SampleSubset(rng, 30, k, scratch);
    ASSERT_EQ(s.size(), k);
    std::set<std::uint32_t> uniq(s.begin(), s.end());
    EXPECT_EQ(uniq.size(), k);
    for (auto x : s) EXPECT_LT(x, 30u);
    EXPECT_TRUE(std::all_of(scratch.begin(), scratch.end(), [](auto b) { return b == 0; }));
  }
  EXPECT_EQ(SampleSubset(rng, 5, 9).size(), 5u);
}

TEST(SampleSubsetTest, EverySubsetEquallyLikely) {
  // All C(5,2) = 10 subsets should appear with frequency ~1/10.
  Rng rng(99);
  std::map<std::pair<std::uint32_t, std::uint32_t>, int> counts;
  constexpr int kDraws = 50000;
  for (int i = 0; i < kDraws; ++i) {
    auto s = SampleSubset(rng, 5, 2);
    std::sort(s.begin(), s.end());
    ++counts[{s[0], s[1]}];
  }
  ASSERT_EQ(counts.size(), 10u);
  double chi2 = 0.0;
  for (const auto& [key, c] : counts) chi2 += (c - 5000.0) * (c - 5000.0) / 5000.0;
  EXPECT_LT(chi2, 27.88);  // 9 dof, 0.999 quantile
}

}  // namespace
}  // namespace authdrift
