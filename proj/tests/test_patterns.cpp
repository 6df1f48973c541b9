#include <gtest/gtest.h>

#include <algorithm>
#include <map>

#include "dpath/patterns.hpp"

using namespace dpath;

namespace {

// words over the given letter counts without equal neighbours, by walking every permutation
std::uint64_t brute_shuffles(const std::vector<std::size_t>& blocks) {
  std::vector<int> word;
  for (std::size_t b = 0; b < blocks.size(); ++b) word.insert(word.end(), blocks[b], static_cast<int>(b));
  std::sort(word.begin(), word.end());
  std::uint64_t hits = 0;
  do {
    bool ok = true;
    for (std::size_t i = 1; i < word.size() && ok; ++i) ok = word[i] != word[i - 1];
    hits += ok;
  } while (std::next_permutation(word.begin(), word.end()));
  return hits;
}

std::uint64_t brute_partitions(std::size_t m, std::size_t k, std::size_t largest) {
  if (k == 0) return m == 0;
  std::uint64_t n = 0;
  for (std::size_t part = 1; part <= std::min(m, largest); ++part) n += brute_partitions(m - part, k - 1, part);
  return n;
}

}  // namespace

TEST(Pattern, RejectsEqualNeighboursAndBadIndices) {
  EXPECT_THROW(Pattern({1, 1}, 2), InvalidArgument);
  EXPECT_THROW(Pattern({0, 1}, 2), InvalidArgument);
  EXPECT_THROW(Pattern({3}, 2), InvalidArgument);
  EXPECT_THROW(Pattern({}, 0), InvalidArgument);
  EXPECT_NO_THROW(Pattern({1, 2, 1}, 2));
}

TEST(Pattern, IdentityAndSwitches) {
  const Pattern id = Pattern::identity(3);
  EXPECT_TRUE(id.is_identity());
  EXPECT_EQ(id.switches(), 0u);
  EXPECT_EQ(Pattern({1, 2, 3}, 3).switches(), 2u);
  EXPECT_EQ(to_string(Pattern({2, 1, 2}, 2)), "(2,1,2)");
}

TEST(Enumerate, CountsMatchFormulaAndOrder) {
  for (int k = 1; k <= 4; ++k)
    for (std::size_t n = 0; n <= 6; ++n) {
      const auto pats = enumerate_patterns(n, k);
      std::uint64_t expect = static_cast<std::uint64_t>(k);
      for (std::size_t i = 0; i < n; ++i) expect *= static_cast<std::uint64_t>(k - 1);
      ASSERT_EQ(pats.size(), expect) << "n=" << n << " k=" << k;
      EXPECT_EQ(pattern_count(n, k), expect);
      EXPECT_TRUE(std::is_sorted(pats.begin(), pats.end()));
      EXPECT_EQ(std::adjacent_find(pats.begin(), pats.end()), pats.end());
    }
}

TEST(Enumerate, SmallCases) {
  const auto p = enumerate_patterns(2, 2);
  ASSERT_EQ(p.size(), 2u);
  EXPECT_EQ(p[0], Pattern({1, 2, 1}, 2));
  EXPECT_EQ(p[1], Pattern({2, 1, 2}, 2));
  EXPECT_TRUE(enumerate_patterns(3, 1).empty());
  EXPECT_EQ(enumerate_patterns(0, 1).size(), 1u);
}

TEST(Content, CountsAndSupport) {
  const auto cv = content(Pattern({1, 3, 1, 3, 1}, 4));
  EXPECT_EQ(cv.counts, (std::vector<std::size_t>{3, 0, 2, 0}));
  EXPECT_EQ(cv.total(), 5u);
  EXPECT_EQ(cv.support(), (std::vector<int>{1, 3}));
  EXPECT_EQ(cv[3], 2u);
}

TEST(Compose, MergesEqualBoundaryFields) {
  const TimedPattern a(Pattern({1, 2}, 2), {0.5, 0.25});
  const TimedPattern b(Pattern({2, 1}, 2), {0.75, 1.0});
  const auto ab = compose(a, b);
  EXPECT_EQ(ab.pattern, Pattern({1, 2, 1}, 2));
  ASSERT_EQ(ab.times.size(), 3u);
  EXPECT_DOUBLE_EQ(ab.times[1], 1.0);
  EXPECT_DOUBLE_EQ(ab.total, 2.5);

  const TimedPattern c(Pattern({1}, 2), {1.0});
  const auto bc = compose(b, c);
  EXPECT_EQ(bc.pattern, Pattern({2, 1}, 2));
  EXPECT_DOUBLE_EQ(bc.times[1], 2.0);
}

TEST(Compose, IdentityIsNeutral) {
  const TimedPattern a(Pattern({1, 2}, 2), {0.5, 0.25});
  const TimedPattern id(Pattern::identity(2), {});
  EXPECT_EQ(compose(a, id).pattern, a.pattern);
  EXPECT_EQ(compose(id, a).times, a.times);
  EXPECT_THROW(compose(a, TimedPattern(Pattern({1}, 3), {1.0})), InvalidArgument);
}

TEST(Reverse, FlipsEntriesAndTimes) {
  const TimedPattern a(Pattern({1, 2, 3}, 3), {0.1, 0.2, 0.3});
  const auto r = reverse(a);
  EXPECT_EQ(r.pattern, Pattern({3, 2, 1}, 3));
  EXPECT_EQ(r.times, (std::vector<double>{0.3, 0.2, 0.1}));
  EXPECT_EQ(reverse(r).pattern, a.pattern);
}

TEST(TimedPattern, ValidatesTimes) {
  EXPECT_THROW(TimedPattern(Pattern({1, 2}, 2), {0.5}), InvalidArgument);
  EXPECT_THROW(TimedPattern(Pattern({1, 2}, 2), {0.5, -0.1}), InvalidArgument);
}

TEST(Shuffles, KnownValues) {
  EXPECT_EQ(count_perfect_shuffles({1, 1}), 2);
  EXPECT_EQ(count_perfect_shuffles({2, 1}), 1);
  EXPECT_EQ(count_perfect_shuffles({1}), 1);
  EXPECT_EQ(count_perfect_shuffles({2}), 0);
  EXPECT_EQ(count_perfect_shuffles({3, 1}), 0);
  EXPECT_THROW(count_perfect_shuffles({0, 1}), InvalidArgument);
}

TEST(Shuffles, MatchBruteForce) {
  const std::vector<std::vector<std::size_t>> cases = {
      {1, 2}, {2, 2}, {3, 2}, {1, 1, 1}, {2, 2, 1}, {3, 2, 2}, {2, 2, 2, 1}, {3, 3, 2}, {1, 1, 1, 1, 1}, {4, 3, 2}};
  for (const auto& c : cases) EXPECT_EQ(count_perfect_shuffles(c), brute_shuffles(c));
}

TEST(Shuffles, EqualsPatternContentTally) {
  std::map<std::vector<std::size_t>, std::uint64_t> tally;
  for (std::size_t len = 1; len <= 8; ++len)
    for (const auto& c : enumerate_patterns(len - 1, 3)) ++tally[content(c).counts];
  for (const auto& [cv, n] : tally) {
    std::vector<std::size_t> b;
    for (auto x : cv)
      if (x) b.push_back(x);
    EXPECT_EQ(count_perfect_shuffles(b), n);
  }
}

TEST(Shuffles, TwentyFiveSingletonsIsFactorial) {
  Count f = 1;
  for (int i = 2; i <= 25; ++i) f *= i;
  EXPECT_EQ(count_perfect_shuffles(std::vector<std::size_t>(25, 1)), f);
  EXPECT_THROW(count_perfect_shuffles(std::vector<std::size_t>(26, 1)), ResourceLimit);
}

TEST(Partitions, MatchBruteForce) {
  EXPECT_EQ(partition_count(4, 2), 2);
  EXPECT_EQ(partition_count(0, 0), 1);
  EXPECT_EQ(partition_count(3, 0), 0);
  for (std::size_t m = 0; m <= 14; ++m)
    for (std::size_t k = 0; k <= m + 1; ++k) EXPECT_EQ(partition_count(m, k), brute_partitions(m, k, m)) << m << "," << k;
}

TEST(Compositions, Binomial) {
  EXPECT_EQ(composition_count(5, 2), 4);
  EXPECT_EQ(composition_count(0, 0), 1);
  EXPECT_EQ(composition_count(3, 0), 0);
  EXPECT_EQ(composition_count(2, 3), 0);
  EXPECT_EQ(composition_count(10, 4), 84);
}

TEST(SparseSubsets, Examples) {
  EXPECT_EQ(sparse_subset_count(3, 1).enumerated, 3);
  const auto r = sparse_subset_count(4, 2);
  EXPECT_EQ(r.enumerated, 3);
  ASSERT_TRUE(r.partition_formula);
  EXPECT_EQ(*r.partition_formula, 3);
  EXPECT_TRUE(r.identity_holds);
}

TEST(SparseSubsets, EnumerationIsBinomial) {
  for (std::size_t m = 1; m <= 14; ++m)
    for (std::size_t k = 0; k <= m; ++k) {
      const std::size_t top = m + 1 >= k ? m + 1 - k : 0;
      Count binom = 1;
      if (k > top) binom = 0;
      for (std::size_t i = 1; i <= k && k <= top; ++i) binom = binom * Count(top - k + i) / Count(i);
      EXPECT_EQ(sparse_subset_count(m, k).enumerated, binom) << m << "," << k;
    }
}

TEST(SparseSubsets, PartitionIdentityFailsWhereGapsAreOrdered) {
  // {1}, {2}, {3}, {4}: four sparse singletons, but p(3,0) + 2p(3,1) + p(3,2) = 3
  const auto r = sparse_subset_count(4, 1);
  EXPECT_EQ(r.enumerated, 4);
  EXPECT_EQ(*r.partition_formula, 3);
  EXPECT_FALSE(r.identity_holds);
  for (std::size_t m = 2; m <= 14; ++m)
    for (std::size_t k = 1; k < m; ++k) {
      const auto s = sparse_subset_count(m, k);
      EXPECT_EQ(*s.composition_formula, s.enumerated) << m << "," << k;
    }
}

TEST(Psh, TwoBlockSeriesMatchesExplicitSum) {
  // |PSh(n,n)| = 2, |PSh(n+1,n)| = |PSh(n,n+1)| = 1, zero otherwise
  const double x = 0.7, y = 0.4;
  double expect = 0.0, fx = 1.0;
  for (int n = 1; n <= 12; ++n) {
    fx *= n;
    const double xn = std::pow(x, n), yn = std::pow(y, n);
    expect += 2.0 * xn * yn / (fx * fx);
    if (2 * n + 1 <= 24) expect += (xn * x * yn + xn * yn * y) / (fx * (n + 1) * fx);
  }
  const auto v = psh_series({x, y}, 24);
  EXPECT_NEAR(v.value, expect, 1e-14);
  EXPECT_THROW(psh_series({x, -1.0}, 10), InvalidArgument);
}
