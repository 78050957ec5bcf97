#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "quantdim/dyadic_measure.hpp"
#include "quantdim/oracles.hpp"
#include "quantdim/spectra.hpp"

using namespace quantdim;

namespace {

const std::vector<double> kMengerP{0.66, 0.2, 0.08, 0.06};

const SpectrumContext& menger(int depth) {
  static const DyadicMeasure m10 = build_measure(menger_sponge_spec(), 10);
  static const SpectrumContext c10(m10);
  static const DyadicMeasure m6 = build_measure(menger_sponge_spec(), 6);
  static const SpectrumContext c6(m6);
  return depth == 10 ? c10 : c6;
}

const SpectrumContext& uniform() {
  static const DyadicMeasure m = build_measure(density_spec("uniform"), 14);
  static const SpectrumContext c(m);
  return c;
}

// log2 of the largest nu(Q') Lambda(Q')^(r/d) over every stored descendant
// of the cube, found by walking the Morton key prefixes.
double brute_log2_j(const DyadicMeasure& m, int level, std::size_t i, double r) {
  const int d = m.dimension();
  const auto key = m.keys(level)[i];
  double best = -INFINITY;
  for (int n = level; n <= m.max_depth(); ++n) {
    const int shift = (n - level) * d;
    for (std::size_t k = 0; k < m.level_size(n); ++k)
      if ((m.keys(n)[k] >> shift) == key) best = std::max(best, std::log2(m.masses(n)[k]) - n * r);
  }
  return best;
}

}  // namespace

TEST(Beta, VanishesAtOneAndCountsCubesAtZero) {
  const auto& c = menger(10);
  for (int n = 1; n <= 10; ++n) {
    EXPECT_NEAR(c.beta_n(1.0, n), 0.0, 1e-12);
    EXPECT_NEAR(c.beta_n(0.0, n), 2.0, 1e-12);
  }
  EXPECT_NEAR(c.beta_hat(2.0).value, oracles::cascade_beta(kMengerP, 2.0), 1e-9);
}

TEST(Beta, ConvexAndNonincreasing) {
  const auto& c = menger(10);
  double prev = INFINITY;
  std::vector<double> v;
  for (double q = 0.0; q <= 4.0; q += 0.125) {
    const double b = c.beta_n(q, 10);
    EXPECT_LE(b, prev + 1e-12);
    prev = b;
    v.push_back(b);
  }
  for (std::size_t i = 1; i + 1 < v.size(); ++i) EXPECT_GE(v[i - 1] + v[i + 1] - 2 * v[i], -1e-12);
}

TEST(Tau, EqualsBetaAtOrderZero) {
  const auto& c = menger(10);
  for (double q : {0.0, 0.5, 1.0, 2.0})
    for (int n = 1; n <= 10; ++n) EXPECT_NEAR(c.tau_n(0.0, q, n), c.beta_n(q, n), 1e-12);
}

TEST(Tau, DominatesShiftedBetaForNegativeOrder) {
  const auto& c = menger(10);
  for (double r : {-0.2, -0.5})
    for (double q : {0.25, 1.0, 1.9, 3.0})
      for (int n = 1; n <= 10; ++n) EXPECT_GE(c.tau_n(r, q, n), c.beta_n(q, n) - q * r - 1e-12);
}

TEST(Tau, ConvexInQ) {
  const auto& c = menger(10);
  std::vector<double> v;
  for (double q = 0.0; q <= 3.0; q += 0.1) v.push_back(c.tau_n(-0.5, q, 10));
  for (std::size_t i = 1; i + 1 < v.size(); ++i) EXPECT_GE(v[i - 1] + v[i + 1] - 2 * v[i], -1e-12);
}

TEST(Tau, MaxTermBounds) {
  // max_Q J^q <= 2^(n tau_n) <= |D_n(nu)| max_Q J^q
  const auto& c = menger(10);
  const double r = -0.5;
  for (double q : {0.5, 1.87, 3.0})
    for (int n = 1; n <= 10; ++n) {
      double top = -INFINITY;
      for (double lj : c.jtable(r).log2_j(n)) top = std::max(top, q * lj);
      const double t = n * c.tau_n(r, q, n);
      EXPECT_GE(t, top - 1e-9);
      EXPECT_LE(t, top + std::log2(static_cast<double>(c.measure().level_size(n))) + 1e-9);
    }
}

TEST(JValue, LocalValueForNonnegativeOrder) {
  const auto& c = menger(6);
  const auto& m = c.measure();
  for (double r : {0.0, 0.7, 2.0})
    for (int n = 0; n <= 6; ++n)
      for (std::size_t i = 0; i < m.level_size(n); ++i) {
        const auto j = j_value(m, r, m.cube(n, i));
        EXPECT_NEAR(j.log2_value, std::log2(m.masses(n)[i]) - n * r, 1e-12);
      }
}

TEST(JValue, MatchesDescendantScanForNegativeOrder) {
  const auto& c = menger(6);
  const auto& m = c.measure();
  const double r = -0.5;
  for (int n = 0; n <= 6; ++n)
    for (std::size_t i = 0; i < m.level_size(n); ++i) {
      const double ref = brute_log2_j(m, n, i, r);
      EXPECT_NEAR(j_value(m, r, m.cube(n, i)).log2_value, ref, 1e-12);
      EXPECT_NEAR(c.jtable(r).log2_j(n)[i], ref, 1e-12);
    }
}

TEST(JValue, MengerHalfNegativeOrderStaysLocal) {
  // every factor p_i 2^(1/2) is below 1, so J never improves on descendants
  const auto& m = menger(6).measure();
  for (std::size_t i = 0; i < m.level_size(4); ++i) {
    const auto j = j_value(m, -0.5, m.cube(4, i));
    EXPECT_EQ(j.argmax_level, 4);
    EXPECT_FALSE(j.growth_suspect);
  }
}

TEST(JValue, AtomGrowsWithTruncationDepth) {
  const auto spec = atomic_spec(1, {{0.3}}, {1.0});
  for (int depth : {6, 10}) {
    const auto m = build_measure(spec, depth);
    const auto j = j_value(m, -0.5, CubeIndex::root(1));
    EXPECT_NEAR(j.log2_value, 0.5 * depth, 1e-12);
    EXPECT_TRUE(j.growth_suspect);
  }
}

TEST(QrBounds, Examples) {
  auto b = qr_bounds(2.0, 1.0, -0.5);
  EXPECT_NEAR(b.first, 4.0 / 3.0, 1e-15);
  EXPECT_NEAR(b.second, 3.0, 1e-15);
  b = qr_bounds(1.0, 1.0, 1.0);
  EXPECT_EQ(b.first, 0.0);
  EXPECT_NEAR(b.second, 0.5, 1e-15);
  b = qr_bounds(1.5, 0.7, 0.0);
  EXPECT_EQ(b.first, 1.0);
  EXPECT_EQ(b.second, 1.0);
  // the upper end relaxes tau(1) to dim_M - dim_inf, which undershoots here
  b = qr_bounds(1.0, 1.0, -0.5);
  EXPECT_NEAR(b.first, 2.0, 1e-15);
  EXPECT_NEAR(b.second, 1.0, 1e-15);
  EXPECT_THROW(qr_bounds(1.0, 1.0, -1.0), DomainError);
  EXPECT_THROW(qr_bounds(0.5, 1.0, 0.5), DomainError);
}

TEST(CriticalQ, UniformOrderOne) {
  const auto c = uniform().critical_q(1.0);
  EXPECT_NEAR(c.q_r, 0.5, 1e-6);
  EXPECT_NEAR(c.d_r, 1.0, 1e-5);
}

TEST(CriticalQ, UniformNegativeOrder) {
  const auto c = uniform().critical_q(-0.5);
  EXPECT_NEAR(c.q_r, 2.0, 1e-5);
  EXPECT_NEAR(c.d_r, 1.0, 1e-5);
  EXPECT_NEAR(c.tau_upper, 2.0, 1e-9);
  EXPECT_TRUE(c.outside_bracket);
}

TEST(CriticalQ, MengerMatchesCascadeRoot) {
  for (double r : {-0.5, -0.2, 0.5, 1.0, 2.0}) {
    const auto c = menger(10).critical_q(r);
    EXPECT_NEAR(c.q_r, oracles::cascade_critical_q(kMengerP, r), 1e-5) << "r=" << r;
    EXPECT_GE(c.q_r, c.bracket.first - 1e-6);
    EXPECT_LE(c.q_r, std::max(c.bracket.second, c.tau_upper) + 1e-6);
  }
}

TEST(CriticalQ, NonincreasingInOrder) {
  double prev = INFINITY;
  for (int k = -11; k <= 40; k += 3) {
    const double r = 0.05 * k;
    const double q = menger(10).critical_q(r).q_r;
    EXPECT_LE(q, prev + 1e-6) << "r=" << r;
    prev = q;
  }
}

TEST(CriticalQ, QuantizationDimensionNondecreasingOnNegativeOrders) {
  double prev = -INFINITY;
  for (int k = -11; k <= -1; ++k) {
    const double d = menger(10).critical_q(0.05 * k).d_r;
    EXPECT_GE(d, prev - 1e-5);
    prev = d;
  }
}

TEST(CriticalQ, OrderBelowInfinityDimensionIsRejected) {
  EXPECT_THROW(menger(10).critical_q(-0.7), DomainError);
}

TEST(CriticalQ, AtomIsDegenerate) {
  const auto m = build_measure(atomic_spec(1, {{0.3}}, {1.0}), 10);
  const auto c = critical_q(m, 0.5);
  EXPECT_TRUE(c.degenerate);
  EXPECT_EQ(c.q_r, 0.0);
  EXPECT_FALSE(c.note.empty());
}

TEST(Renyi, Examples) {
  EXPECT_NEAR(renyi(menger(10), 0.0, 1.0), oracles::cascade_entropy(kMengerP), 1e-6);
  EXPECT_NEAR(renyi(uniform(), 0.0, 2.0), 1.0, 1e-9);
  const auto c = menger(10).critical_q(-0.5);
  EXPECT_NEAR(renyi(menger(10), -0.5, c.q_r), c.d_r, 1e-4);
}

TEST(DZero, Examples) {
  EXPECT_NEAR(d_zero(menger(10)).value, oracles::cascade_entropy(kMengerP), 1e-5);
  EXPECT_NEAR(d_zero(uniform()).value, 1.0, 1e-6);
  const auto m = build_measure(cascade_spec(1, {{0.0}, {0.5}}, {0.5, 0.5}), 10);
  EXPECT_NEAR(d_zero(m).value, 1.0, 1e-6);
  EXPECT_FALSE(d_zero(m).non_differentiable);
}

TEST(BoundaryLimit, MengerIsFinite) {
  std::vector<double> grid;
  for (double r = -0.59; r < -0.04; r += 0.05) grid.push_back(r);
  const auto b = boundary_limit(menger(10), grid);
  EXPECT_FALSE(b.capped);
  EXPECT_GE(b.a_nu, menger(10).critical_q(-0.5).q_r);
  EXPECT_TRUE(std::isfinite(b.limit_dim));
}

TEST(BoundaryLimit, UniformGrowsTowardMinusOne) {
  const std::vector<double> grid{-0.5, -0.9, -0.99, -0.995, -0.998};
  const auto b = boundary_limit(uniform(), grid);
  EXPECT_NEAR(b.a_nu, 500.0, 0.5);
  EXPECT_NEAR(b.limit_dim, 500.0 / 499.0, 1e-3);
  for (std::size_t i = 1; i < b.q_by_r.size(); ++i) EXPECT_GT(b.q_by_r[i].second, b.q_by_r[i - 1].second);
}

TEST(BoundaryLimit, RejectsShortOrPositiveGrids) {
  const std::vector<double> short_grid{-0.1, -0.2};
  EXPECT_THROW(boundary_limit(uniform(), short_grid), DomainError);
  const std::vector<double> bad{-0.1, -0.2, -0.3, -0.4, 0.1};
  EXPECT_THROW(boundary_limit(uniform(), bad), DomainError);
}

TEST(PfRegularity, CascadesHaveFlatPartitionFunctions) {
  const auto rep = pf_regularity_report(menger(10), -0.5);
  ASSERT_TRUE(rep.critical.has_value());
  EXPECT_LE(rep.max_spread, 1e-9);
  EXPECT_TRUE(rep.consistent);
  EXPECT_LE(pf_regularity_report(uniform(), 0.5).max_spread, 1e-9);
}

TEST(Spectrum, CurveSamplesEveryLevel) {
  const std::vector<double> grid{0.0, 1.0, 2.0};
  const auto c = spectrum_curve(menger(10), SpectrumKind::Beta, 0.0, grid);
  ASSERT_EQ(c.samples.size(), 3u);
  for (const auto& s : c.samples) EXPECT_EQ(s.per_level.size(), 10u);
  EXPECT_NEAR(c.samples[1].extrapolated, 0.0, 1e-12);
}
