#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "quantdim/cascade_profile.hpp"
#include "quantdim/dyadic_measure.hpp"
#include "quantdim/oracles.hpp"
#include "quantdim/partitions.hpp"
#include "quantdim/spectra.hpp"

using namespace quantdim;

namespace {

const std::vector<double> kMengerP{0.66, 0.2, 0.08, 0.06};

const DyadicMeasure& menger(int depth) {
  static const DyadicMeasure m6 = build_measure(menger_sponge_spec(), 6);
  static const DyadicMeasure m10 = build_measure(menger_sponge_spec(), 10);
  return depth == 10 ? m10 : m6;
}

const DyadicMeasure& uniform() {
  static const DyadicMeasure m = build_measure(density_spec("uniform"), 12);
  return m;
}

// Every dyadic partition of a binary tree as (cardinality, max log2 J),
// listed literally; feasible up to depth 4.
using Summary = std::vector<std::pair<std::size_t, double>>;

Summary all_partitions(const DyadicMeasure& m, const JTable& jt, int level, std::size_t i, std::size_t cap) {
  Summary out{{1, jt.log2_j(level)[i]}};
  if (level == m.max_depth()) return out;
  const auto [b, e] = m.child_range(level, i);
  Summary acc{{0, -INFINITY}};
  for (auto c = b; c < e; ++c) {
    const auto sub = all_partitions(m, jt, level + 1, c, cap);
    Summary next;
    for (const auto& [n1, g1] : acc)
      for (const auto& [n2, g2] : sub)
        if (n1 + n2 <= cap) next.emplace_back(n1 + n2, std::max(g1, g2));
    acc = std::move(next);
  }
  // a binary child with zero mass still occupies one cube of the partition
  const std::size_t missing = 2 - (e - b);
  for (auto& [n, g] : acc) out.emplace_back(n + missing, g);
  return out;
}

double best_gamma(const Summary& all, std::size_t budget) {
  double best = INFINITY;
  for (const auto& [n, g] : all)
    if (n <= budget) best = std::min(best, g);
  return best;
}

}  // namespace

TEST(GreedyPartition, UniformBudgetEight) {
  const auto p = greedy_partition(uniform(), -0.5, 8);
  EXPECT_EQ(p.cardinality, 8u);
  for (const auto& q : p.cubes) EXPECT_EQ(q.level, 3);
  EXPECT_NEAR(p.max_j, std::exp2(-1.5), 1e-12);
}

TEST(GreedyPartition, MengerBudgetFour) {
  const auto p = greedy_partition(menger(10), -0.5, 4);
  EXPECT_NEAR(p.max_j, 0.66 * std::sqrt(2.0), 1e-3);
  EXPECT_NEAR(p.max_j, 0.9334, 1e-4);
}

TEST(GreedyPartition, BudgetOneKeepsTheRoot) {
  const auto p = greedy_partition(menger(6), -0.5, 1);
  ASSERT_EQ(p.cubes.size(), 1u);
  EXPECT_EQ(p.cubes[0].level, 0);
  EXPECT_NEAR(p.max_j, 1.0, 1e-12);
}

TEST(GreedyPartition, ValidAfterEverySplit) {
  for (std::size_t budget = 1; budget <= 60; ++budget) {
    const auto p = greedy_partition(menger(6), -0.5, budget);
    EXPECT_TRUE(is_valid_partition(p.cubes, 3)) << budget;
    EXPECT_LE(p.cardinality, budget);
  }
}

TEST(GreedyPartition, GammaNonincreasingInBudget) {
  double prev = INFINITY;
  for (std::size_t budget = 1; budget <= 200; ++budget) {
    const double g = greedy_partition(menger(10), -0.5, budget).max_j;
    EXPECT_LE(g, prev);
    prev = g;
  }
}

TEST(GreedyPartition, MatchesLiteralEnumerationOnRandomCascades) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> pd(0.05, 0.95), rd(-0.5, 1.5);
  for (int trial = 0; trial < 20; ++trial) {
    const double p0 = pd(rng), r = rd(rng);
    const auto m = build_measure(cascade_spec(1, {{0.0}, {0.5}}, {p0, 1.0 - p0}), 4);
    const JTable jt(m, r);
    const auto all = all_partitions(m, jt, 0, 0, 16);
    for (std::size_t budget = 1; budget <= 16; ++budget) {
      const auto p = greedy_partition(m, jt, budget);
      EXPECT_NEAR(p.log2_max_j, best_gamma(all, budget), 1e-12) << "p0=" << p0 << " r=" << r << " n=" << budget;
    }
  }
}

TEST(PartitionEntropy, UniformThreshold) {
  EXPECT_EQ(partition_entropy(uniform(), -0.5, std::exp2(1.5)).m, 16u);
  EXPECT_EQ(partition_entropy(uniform(), -0.5, 0.5).m, 1u);
}

TEST(PartitionEntropy, NondecreasingInX) {
  std::size_t prev = 0;
  for (double x = 1.0; x < 1.95; x *= 1.05) {
    const auto e = partition_entropy(menger(10), -0.5, x);
    EXPECT_GE(e.m, prev);
    EXPECT_TRUE(is_valid_partition(e.partition.cubes, 3));
    for (double j : e.partition.j_values) EXPECT_LT(j, 1.0 / x * (1 + 1e-12));
    prev = e.m;
  }
}

TEST(PartitionEntropy, UnreachableThresholdReportsBest) {
  try {
    partition_entropy(menger(6), -0.5, 100.0);
    FAIL() << "expected a depth limit";
  } catch (const DepthLimitError& e) {
    EXPECT_GE(e.best_max_j(), 0.01);
    EXPECT_EQ(e.code(), ExitCode::DepthExhausted);
  }
}

TEST(CoarseCounts, UniformThresholds) {
  const auto half = coarse_counts(uniform(), -0.5, 0.5, 10);
  for (const auto& [n, c] : half.counts) EXPECT_EQ(c, std::exp2(n));
  EXPECT_NEAR(half.f_upper, 1.0, 1e-12);
  const auto low = coarse_counts(uniform(), -0.5, 0.4, 10);
  for (const auto& [n, c] : low.counts) EXPECT_EQ(c, 0.0);
}

TEST(CoarseCounts, MengerMatchesWordEnumeration) {
  const int n = 10;
  const double r = -0.5, alpha = 1.0;
  // J of the cube reached by a word is prod p_i 2^(-r) per letter
  std::size_t expected = 0;
  for (std::uint32_t w = 0; w < (1u << (2 * n)); ++w) {
    double lj = 0.0;
    for (int k = 0; k < n; ++k) lj += std::log2(kMengerP[(w >> (2 * k)) & 3u]) - r;
    if (lj >= -alpha * n) ++expected;
  }
  const auto c = coarse_counts(menger(10), r, alpha, n);
  EXPECT_EQ(c.counts.back().second, static_cast<double>(expected));
}

TEST(CoarseCounts, NondecreasingInAlpha) {
  const JTable jt(menger(10), -0.5);
  std::vector<double> prev(10, 0.0);
  for (double a = 0.1; a <= 3.0; a += 0.1) {
    const auto c = coarse_counts(jt, a, 10);
    for (int i = 0; i < 10; ++i) {
      EXPECT_GE(c.counts[i].second, prev[i]);
      prev[i] = c.counts[i].second;
    }
  }
}

TEST(CoarseDimension, UniformOptimumIsTwo) {
  std::vector<double> alphas;
  for (int i = 1; i <= 30; ++i) alphas.push_back(0.1 * i);
  const auto d = optimized_coarse_dimension(uniform(), -0.5, alphas, 12);
  EXPECT_NEAR(d.f_upper, 2.0, 1e-9);
  EXPECT_NEAR(d.argmax_upper, 0.5, 1e-9);
}

TEST(CascadeProfile, RejectsGrowingFactors) {
  EXPECT_THROW(CascadeProfile(kMengerP, -1.0), DomainError);
}

TEST(CascadeProfile, LevelCountsMatchTree) {
  const CascadeProfile prof(kMengerP, -0.5);
  const JTable jt(menger(10), -0.5);
  std::vector<double> alphas;
  for (int i = 1; i <= 40; ++i) alphas.push_back(0.075 * i);
  for (int n = 1; n <= 10; ++n) {
    const auto counts = prof.level_counts(n, alphas);
    for (std::size_t j = 0; j < alphas.size(); ++j)
      EXPECT_EQ(counts[j], coarse_counts(jt, alphas[j], n).counts.back().second) << n << " " << alphas[j];
  }
}

TEST(CascadeProfile, GreedyStatisticsMatchTree) {
  for (double r : {-0.5, 0.3, 1.0}) {
    const CascadeProfile prof(kMengerP, r);
    const JTable jt(menger(10), r);
    for (double budget = 1; budget <= 40; ++budget) {
      const auto p = greedy_partition(menger(10), jt, static_cast<std::size_t>(budget));
      if (p.depth_limited) continue;
      EXPECT_NEAR(prof.log2_gamma(budget), p.log2_max_j, 1e-9) << r << " " << budget;
    }
    for (double x : {1.1, 1.4, 1.8, 2.5}) {
      try {
        const auto e = partition_entropy(menger(10), jt, x);
        EXPECT_EQ(prof.partition_entropy(x), static_cast<double>(e.m)) << r << " " << x;
      } catch (const DepthLimitError&) {
      }
    }
  }
}

TEST(CascadeProfile, EntropyGrowsWithCriticalExponent) {
  const CascadeProfile prof(kMengerP, -0.5);
  const double m1 = prof.partition_entropy(1e4), m2 = prof.partition_entropy(1e6);
  EXPECT_NEAR(std::log(m2 / m1) / std::log(100.0), oracles::cascade_critical_q(kMengerP, -0.5), 0.05);
}
