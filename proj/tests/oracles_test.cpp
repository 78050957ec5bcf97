#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "quantdim/dyadic_measure.hpp"
#include "quantdim/oracles.hpp"
#include "quantdim/quantizer.hpp"

using namespace quantdim;

TEST(CascadeBeta, Examples) {
  const std::vector<double> menger{0.66, 0.2, 0.08, 0.06};
  EXPECT_NEAR(oracles::cascade_beta(menger, 0.0), 2.0, 1e-15);
  EXPECT_NEAR(oracles::cascade_beta(menger, 1.0), 0.0, 1e-15);
  EXPECT_NEAR(oracles::cascade_beta(menger, 2.0), std::log2(0.66 * 0.66 + 0.2 * 0.2 + 0.08 * 0.08 + 0.06 * 0.06), 1e-12);
  const std::vector<double> fair{0.5, 0.5};
  for (double q : {0.0, 0.5, 2.0}) EXPECT_NEAR(oracles::cascade_beta(fair, q), 1.0 - q, 1e-15);
}

TEST(CascadeCriticalQ, RootOfTau) {
  const std::vector<double> menger{0.66, 0.2, 0.08, 0.06};
  for (double r : {-0.5, 0.5, 1.0}) {
    const double q = oracles::cascade_critical_q(menger, r);
    EXPECT_NEAR(oracles::cascade_tau(menger, r, q), 0.0, 1e-12);
  }
  EXPECT_NEAR(oracles::cascade_critical_q(menger, -0.5), 1.8710, 5e-4);
}

TEST(UniformMidpoint, Examples) {
  EXPECT_NEAR(oracles::uniform_midpoint_error(4, -0.5), 1.0 / 32.0, 1e-15);
  EXPECT_NEAR(oracles::uniform_midpoint_error(1, 1.0), 0.25, 1e-15);
  EXPECT_NEAR(oracles::uniform_midpoint_error(2, 2.0), std::sqrt(1.0 / 48.0), 1e-15);
  EXPECT_NEAR(oracles::uniform_midpoint_error(3, 0.0), std::exp(-1.0) / 6.0, 1e-15);
  EXPECT_THROW(oracles::uniform_midpoint_error(4, -1.0), DomainError);
  EXPECT_THROW(oracles::uniform_midpoint_error(0, 1.0), DomainError);
}

TEST(Registry, NamesAndMetadata) {
  const auto& names = oracles::registered_names();
  EXPECT_EQ(names.size(), 4u);
  EXPECT_THROW(oracles::example_density("missing"), LookupError);
  const auto& ex28 = oracles::example_density("ex28");
  EXPECT_NEAR(ex28.s_h, 4.0 / 3.0, 1e-15);
  EXPECT_EQ(ex28.dim_infty, 0.5);
  EXPECT_FALSE(ex28.norm_at_s_h_finite);
  const auto& ex29 = oracles::example_density("ex29");
  EXPECT_EQ(ex29.s_h, 2.0);
  EXPECT_EQ(ex29.dim_infty, 0.5);
  EXPECT_TRUE(ex29.norm_at_s_h_finite);
  EXPECT_TRUE(std::isinf(oracles::example_density("uniform").s_h));
}

TEST(Registry, DensitiesAreNormalized) {
  for (const auto& name : oracles::registered_names()) {
    const auto i = oracles::example_density(name).density.mass(0.0, 1.0);
    EXPECT_TRUE(i.converged) << name;
    EXPECT_NEAR(i.value, 1.0, 1e-8) << name;
  }
}

TEST(Registry, SpreadFamilyMassesAreExact) {
  namespace sf = oracles::spread_family;
  double total = 0.0;
  for (int n = 1; n <= 60; ++n) {
    EXPECT_NEAR(std::exp2(n) * sf::piece_mass(n), sf::family_mass(n), 1e-15 * sf::family_mass(n));
    EXPECT_NEAR(sf::piece_value(n) * sf::piece_length(n), sf::piece_mass(n), 1e-15 * sf::piece_mass(n));
    total += sf::family_mass(n);
  }
  EXPECT_NEAR(total, sf::total_mass(), 1e-8);
}

TEST(Registry, Ex29IsNormalizable) {
  const auto& e = oracles::example_density("ex29");
  EXPECT_GT(e.normalization, 0.0);
  EXPECT_TRUE(std::isfinite(e.normalization));
}

TEST(SNorm, CriticalExponentChain) {
  // ex28 diverges at its critical exponent; ex29 stays finite there
  EXPECT_TRUE(oracles::s_norm("ex28", 4.0 / 3.0).divergent);
  EXPECT_FALSE(oracles::s_norm("ex28", 1.2).divergent);
  const auto n29 = oracles::s_norm("ex29", 2.0);
  EXPECT_FALSE(n29.divergent);
  EXPECT_TRUE(std::isfinite(n29.value));
  EXPECT_TRUE(oracles::s_norm("ex29", 2.1).divergent);
  EXPECT_NEAR(oracles::s_norm("uniform", 3.0).value, 1.0, 1e-12);
}

TEST(SNorm, OrderChainFromCriticalExponents) {
  // r_h = 1/s_h - 1 orders the examples: ex29 < ex28 < 0
  const double r29 = 1.0 / oracles::example_density("ex29").s_h - 1.0;
  const double r28 = 1.0 / oracles::example_density("ex28").s_h - 1.0;
  EXPECT_NEAR(r29, -0.5, 1e-15);
  EXPECT_NEAR(r28, -0.25, 1e-15);
  EXPECT_LT(-1.0, r29);
  EXPECT_LT(r29, r28);
}

TEST(PhiZero, Examples) {
  EXPECT_NEAR(oracles::phi_zero_reference("uniform").value, 1.0, 1e-12);
  EXPECT_NEAR(oracles::phi_zero_reference("linear2x").value, std::exp(0.5) / 2.0, 1e-10);
  const auto e29 = oracles::phi_zero_reference("ex29");
  EXPECT_FALSE(e29.divergent);
  EXPECT_GT(e29.value, 0.0);
  EXPECT_LE(e29.value, 1.0);
  EXPECT_EQ(oracles::phi_zero_reference("ex29").value, e29.value);
}

TEST(DimInfty, Ex29EstimateDecreasesTowardDeclaredValue) {
  // the log factor makes the finite-depth slope converge slowly from above
  double prev = INFINITY;
  for (int depth : {8, 12, 16}) {
    const double v = dim_infty_estimate(build_measure(density_spec("ex29"), depth)).value;
    EXPECT_GT(v, 0.5);
    EXPECT_LT(v, prev);
    prev = v;
  }
}

TEST(DimInfty, Ex28EstimateNearDeclaredValue) {
  const double v = dim_infty_estimate(build_measure(density_spec("ex28"), 16)).value;
  EXPECT_NEAR(v, oracles::example_density("ex28").dim_infty, 0.1);
}

TEST(PhiZero, SpreadFamilyMatchesPieceSum) {
  namespace sf = oracles::spread_family;
  const double z = sf::total_mass();
  double ent = 0.0;
  for (int n = 1; n <= 200; ++n) {
    const double v = sf::piece_value(n) / z;
    ent += std::exp2(n) * sf::piece_length(n) * v * std::log(v);
  }
  EXPECT_NEAR(oracles::phi_zero_reference("ex28").value, std::exp(-ent), 1e-8);
}

TEST(PhiZero, Ex29StableUnderQuadratureRefinement) {
  const auto& e = oracles::example_density("ex29");
  for (int order : {12, 30}) {
    QuadratureSettings q;
    q.order = order;
    q.rel_tol = 1e-14;
    const auto d = Density1d::pointwise(oracles::log_density_value, {0.0}, q).scaled(1.0 / e.normalization);
    const auto ent = d.entropy_integral();
    ASSERT_FALSE(ent.divergent);
    EXPECT_NEAR(std::exp(-ent.value), oracles::phi_zero_reference("ex29").value, 1e-6) << order;
  }
}
