#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "quantdim/dyadic_measure.hpp"
#include "quantdim/oracles.hpp"
#include "quantdim/quantizer.hpp"

using namespace quantdim;

namespace {

Codebook midpoints(int k) {
  Codebook a;
  for (int j = 0; j < k; ++j) a.push_back({(2.0 * j + 1.0) / (2.0 * k)});
  return a;
}

OptimizeOptions grid(int g) {
  OptimizeOptions o;
  o.grid = g;
  return o;
}

}  // namespace

TEST(Distortion, UniformMidpoints) {
  const auto u = density_target("uniform");
  for (int k : {1, 4, 16}) {
    const auto d = distortion(u, midpoints(k), -0.5);
    EXPECT_NEAR(d.value, std::sqrt(8.0 * k), 1e-9 * k);
    EXPECT_NEAR(error_from_distortion(d.value, -0.5), 1.0 / (8.0 * k), 1e-10);
    for (double r : {-0.5, 0.0, 1.0, 2.0})
      EXPECT_NEAR(error_from_distortion(distortion(u, midpoints(k), r).value, r), oracles::uniform_midpoint_error(k, r),
                  1e-9);
  }
  EXPECT_NEAR(distortion(u, {{0.5}}, 1.0).value, 0.25, 1e-12);
}

TEST(Distortion, AtomUnderACodePointDiverges) {
  const auto t = PointTarget::from_atoms(AtomicSpec{{{0.5}}, {1.0}}, 1);
  const auto d = distortion(t, {{0.5}}, -0.5);
  EXPECT_TRUE(d.divergent);
  EXPECT_EQ(error_from_distortion(d.value, -0.5), 0.0);
  EXPECT_FALSE(distortion(t, {{0.25}}, -0.5).divergent);
}

TEST(Distortion, OrderAtMostMinusOneDivergesOnDensities) {
  const auto u = density_target("uniform");
  EXPECT_TRUE(distortion(u, midpoints(4), -1.0).divergent);
  EXPECT_TRUE(distortion(u, midpoints(4), -1.5).divergent);
  EXPECT_FALSE(distortion(u, midpoints(4), -0.9).divergent);
}

TEST(Distortion, AddingPointsMovesVTheRightWay) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const auto h = density_target("linear2x");
  for (int trial = 0; trial < 20; ++trial) {
    Codebook a{{u01(rng)}};
    for (int k = 0; k < 6; ++k) {
      Codebook b = a;
      b.push_back({u01(rng)});
      EXPECT_GE(distortion(h, b, -0.5).value, distortion(h, a, -0.5).value * (1 - 1e-12));
      EXPECT_LE(distortion(h, b, 1.0).value, distortion(h, a, 1.0).value * (1 + 1e-12));
      EXPECT_LE(distortion(h, b, 0.0).value, distortion(h, a, 0.0).value + 1e-12);
      a = b;
    }
  }
}

TEST(Distortion, MaxAndEuclidNormsAgreeOnTheLine) {
  const auto t = PointTarget::from_atoms(AtomicSpec{{{0.1}, {0.4}, {0.9}}, {1, 2, 3}}, 1);
  const Codebook a{{0.3}, {0.8}};
  EXPECT_DOUBLE_EQ(distortion(t, a, 1.5, Norm::Euclid).value, distortion(t, a, 1.5, Norm::Max).value);
}

TEST(Dp1d, UniformFourPoints) {
  const auto u = density_target("uniform");
  const auto q = optimize_codebook(u, 4, -0.5, Strategy::Dp1d, 0, grid(14));
  EXPECT_NEAR(q.error, 1.0 / 32.0, 0.005 / 32.0);
  ASSERT_EQ(q.codebook.size(), 4u);
  for (int j = 0; j < 4; ++j) EXPECT_NEAR(q.codebook[j][0], (2.0 * j + 1.0) / 8.0, 0.01);
  const auto g = optimize_codebook(u, 4, 0.0, Strategy::Dp1d, 0, grid(14));
  EXPECT_NEAR(g.error, std::exp(-1.0) / 8.0, 0.005 * std::exp(-1.0) / 8.0);
}

TEST(Dp1d, GridRefinementConverges) {
  const auto h = density_target("linear2x");
  for (double r : {-0.5, 1.0})
    for (int g : {6, 8, 10}) {
      const double a = optimize_codebook(h, 5, r, Strategy::Dp1d, 0, grid(g)).distortion;
      const double b = optimize_codebook(h, 5, r, Strategy::Dp1d, 0, grid(g + 2)).distortion;
      EXPECT_LE(std::abs(a - b) / b, std::exp2(-g / 2.0)) << "r=" << r << " G=" << g;
    }
}

TEST(Dp1d, ErrorCurveHasDimensionOneOnTheUniformLaw) {
  std::vector<int> ns;
  for (int n = 2; n <= 32; ++n) ns.push_back(n);
  const auto c = error_curve(density_target("uniform"), -0.5, ns, Strategy::Dp1d, 0);
  EXPECT_FALSE(c.divergent);
  EXPECT_NEAR(c.dimension, 1.0, 0.02);
  EXPECT_NEAR(c.coefficient, 0.125, 0.125 * 0.02);
  for (std::size_t i = 1; i < c.points.size(); ++i) EXPECT_LE(c.points[i].second, c.points[i - 1].second);
}

TEST(Quantize, AtomsFullyCoveredHaveZeroError) {
  const AtomicSpec s{{{0.1}, {0.35}, {0.6}, {0.95}}, {0.1, 0.2, 0.3, 0.4}};
  const auto t = PointTarget::from_atoms(s, 1);
  for (auto strategy : {Strategy::Lloyd, Strategy::Exhaustive}) {
    const auto q = optimize_codebook(t, 5, 2.0, strategy, 1);
    EXPECT_EQ(q.error, 0.0);
  }
}

TEST(Quantize, NegativeOrderOnAtomsIsDivergent) {
  const auto t = PointTarget::from_atoms(AtomicSpec{{{0.2}, {0.7}}, {0.5, 0.5}}, 1);
  const auto q = optimize_codebook(t, 1, -0.3, Strategy::Lloyd, 1);
  EXPECT_TRUE(q.divergent);
  EXPECT_EQ(q.error, 0.0);
}

TEST(Quantize, LloydMatchesExhaustiveOnSmallSupports) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u01(0.01, 1.0);
  std::uniform_int_distribution<int> size(2, 8);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 1 + trial % 2;
    AtomicSpec s;
    const int m = size(rng);
    for (int i = 0; i < m; ++i) {
      Point p;
      for (int k = 0; k < d; ++k) p.push_back(u01(rng));
      s.points.push_back(p);
      s.weights.push_back(u01(rng));
    }
    const auto t = PointTarget::from_atoms(s, d);
    OptimizeOptions o;
    o.starts = 16;
    for (int i = 0; i < m; ++i) o.candidates.emplace_back(t.point(i).begin(), t.point(i).end());
    for (double r : {-0.5, 1.0, 2.0})
      for (int n = 1; n < m; ++n) {
        const auto ex = optimize_codebook(t, n, r, Strategy::Exhaustive, 0, o);
        const auto ll = optimize_codebook(t, n, r, Strategy::Lloyd, 9, o);
        EXPECT_EQ(ex.divergent, ll.divergent);
        EXPECT_DOUBLE_EQ(ll.distortion, ex.distortion) << "trial " << trial << " r=" << r << " n=" << n;
      }
  }
}

TEST(Quantize, LloydIsDeterministic) {
  const auto h = density_target("linear2x");
  const auto a = optimize_codebook(h, 6, 1.0, Strategy::Lloyd, 42);
  const auto b = optimize_codebook(h, 6, 1.0, Strategy::Lloyd, 42);
  EXPECT_EQ(a.codebook, b.codebook);
  EXPECT_EQ(a.distortion, b.distortion);
}

TEST(Quantize, LloydAgreesWithDpOnDensities) {
  const auto h = density_target("linear2x");
  for (double r : {-0.5, 1.0}) {
    const auto dp = optimize_codebook(h, 6, r, Strategy::Dp1d, 0, grid(14));
    const auto ll = optimize_codebook(h, 6, r, Strategy::Lloyd, 7);
    EXPECT_NEAR(ll.error, dp.error, 1e-3 * dp.error) << "r=" << r;
  }
}

TEST(Quantize, MeasureModeBoundsCellError) {
  const auto m = build_measure(density_spec("uniform"), 12);
  const auto t = PointTarget::from_measure(m, 12);
  const Codebook a = midpoints(4);
  const auto d = distortion(t, a, 1.0);
  EXPECT_NEAR(d.value, distortion(density_target("uniform"), a, 1.0).value, d.error_bound + 1e-12);
}

TEST(Quantize, SelfSimilarCodebooksScale) {
  // the 8-point codebook of Lambda contains two rescaled 4-point codebooks
  const auto u = density_target("uniform");
  const double v4 = optimize_codebook(u, 4, -0.5, Strategy::Dp1d, 0, grid(12)).distortion;
  const double v8 = optimize_codebook(u, 8, -0.5, Strategy::Dp1d, 0, grid(12)).distortion;
  EXPECT_GE(v8, std::sqrt(2.0) * v4 * (1 - 1e-9));
}

TEST(Quantize, Ex29DivergesBelowMinusOneHalf) {
  std::vector<int> ns{1, 2, 4};
  EXPECT_TRUE(error_curve(density_target("ex29"), -0.6, ns, Strategy::Dp1d, 0).divergent);
  const auto q = optimize_codebook(density_target("ex29"), 4, -0.4, Strategy::Dp1d, 0, grid(6));
  EXPECT_FALSE(q.divergent);
  EXPECT_GT(q.error, 0.0);
}

TEST(Quantize, BadArgumentsAreRejected) {
  const auto u = density_target("uniform");
  EXPECT_THROW(optimize_codebook(u, 0, 1.0, Strategy::Dp1d, 0), DomainError);
  std::vector<int> ns{4, 2};
  EXPECT_THROW(error_curve(u, 1.0, ns, Strategy::Dp1d, 0), DomainError);
  EXPECT_THROW(optimize_codebook(u, 2, 1.0, Strategy::Dp1d, 0, grid(30)), DomainError);
}

TEST(Phi, Examples) {
  for (double r : {-0.5, 0.0, 1.0, 2.0}) EXPECT_NEAR(phi_r("uniform", r).value, 1.0, 1e-9);
  EXPECT_NEAR(phi_r("linear2x", -0.5).value, 0.75, 1e-9);
  EXPECT_NEAR(phi_r("linear2x", 0.0).value, std::exp(0.5) / 2.0, 1e-9);
  EXPECT_EQ(phi_r("uniform", -1.0).value, 0.0);
  EXPECT_EQ(phi_r("uniform", -2.0).value, 0.0);
}

TEST(Phi, ContinuousAtOrderZero) {
  for (const char* name : {"linear2x", "ex28"}) {
    const double p0 = phi_r(name, 0.0).value;
    EXPECT_NEAR(phi_r(name, -1e-3).value, p0, 1e-3) << name;
    EXPECT_NEAR(phi_r(name, 1e-3).value, p0, 1e-3) << name;
  }
}

TEST(LebesgueBound, Examples) {
  auto b = lebesgue_bound_check({{0.5}}, -0.5);
  EXPECT_NEAR(b.lhs, 2.0 * std::sqrt(2.0), 1e-9);
  EXPECT_NEAR(b.bound, std::sqrt(2.0) + 18.0 / (std::sqrt(0.5) - 0.5), 1e-9);
  EXPECT_TRUE(b.holds);
  b = lebesgue_bound_check(midpoints(16), -0.5);
  EXPECT_NEAR(b.lhs, std::sqrt(128.0), 1e-8);
  EXPECT_TRUE(b.holds);
  EXPECT_THROW(lebesgue_bound_check({{0.5}}, 0.5), DomainError);
}

TEST(MixtureBounds, SingleComponentIsTight) {
  const auto rep = mixture_bounds_check({uniform_on(0.0, 1.0)}, {1.0}, 4, {4}, -0.5, grid(10));
  EXPECT_NEAR(rep.v_mixture, rep.upper, 1e-9 * rep.upper);
  EXPECT_NEAR(rep.v_mixture, rep.lower, 1e-9 * rep.lower);
  EXPECT_TRUE(rep.upper_holds);
  EXPECT_TRUE(rep.lower_holds);
}

TEST(MixtureBounds, DisjointHalves) {
  const auto rep =
      mixture_bounds_check({uniform_on(0.0, 0.5), uniform_on(0.5, 1.0)}, {0.3, 0.7}, 6, {3, 3}, -0.5, grid(10));
  EXPECT_TRUE(rep.upper_holds);
  EXPECT_TRUE(rep.lower_holds);
}
