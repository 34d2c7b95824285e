#include "bound_oracle.hpp"
#include "krp/bounds.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using krp::BoundParams;
using krp::BoundVariant;
using krp::Index;

namespace {

using namespace bound_oracle;

BoundParams base() {
  BoundParams p;
  p.r = 10;
  p.d = 3;
  p.delta = 0.01;
  p.eps = 0.5;
  return p;
}

}  // namespace

TEST(Ckd, ClosedFormValues) {
  const double e = std::exp(1.0);
  EXPECT_NEAR(krp::c_kd(1, 1, 1), 8 * e, 1e-12);
  EXPECT_NEAR(krp::c_kd(1, 1, 1), 21.746254627672362, 1e-12);
  EXPECT_NEAR(krp::c_kd(1, 1, 2), 8 * (2 * e) * (2 * e), 1e-10);
  EXPECT_NEAR(krp::c_kd(1, 1, 2), 236.44979516578081, 1e-10);
}

TEST(Ckd, IncreasingInD) {
  for (Index d = 1; d < 10; ++d) EXPECT_LT(krp::c_kd(1, 1, d), krp::c_kd(1, 1, d + 1));
}

TEST(Gamma, VanishesAsEllGrows) {
  const BoundParams p = base();
  EXPECT_LT(krp::gamma_rrf(p, 1e9, 1e12), 1e-3 * krp::gamma_rrf(p, 1e3, 1e12));
}

TEST(Gamma, Monotonicities) {
  BoundParams p = base();
  for (double ell : {10.0, 100.0, 1000.0}) {
    BoundParams hi_delta = p;
    hi_delta.delta = 2 * p.delta;
    EXPECT_LT(krp::gamma_rrf(hi_delta, ell, 1e4), krp::gamma_rrf(p, ell, 1e4));
    BoundParams hi_d = p;
    hi_d.d = p.d + 1;
    EXPECT_GT(krp::gamma_rrf(hi_d, ell, 1e4), krp::gamma_rrf(p, ell, 1e4));
    EXPECT_GT(krp::gamma_rrf(p, ell, 2e4), krp::gamma_rrf(p, ell, 1e4));
    EXPECT_LT(krp::gamma_rrf(p, 2 * ell, 1e4), krp::gamma_rrf(p, ell, 1e4));
  }
}

TEST(Gamma, SpotValues) {
  // reference values from a 40-digit evaluation of the closed form
  BoundParams p = base();
  EXPECT_NEAR(krp::gamma_rrf(p, 100, 1000), 476842.68573329012, 1e-9 * 476842.7);
  BoundParams q;
  q.r = 5;
  q.d = 2;
  q.delta = 0.05;
  q.K = 1.5;
  q.Cs = 0.7;
  EXPECT_NEAR(krp::gamma_rrf(q, 250, 4096), 1639.3073235789292, 1e-9 * 1639.3);
}

TEST(Gamma, RequiresNAboveR) {
  EXPECT_THROW(krp::gamma_rrf(base(), 20, 10), krp::DimensionError);
}

TEST(Gamma, LogSpaceHandlesLargeOrders) {
  BoundParams p = base();
  p.d = 40;
  p.delta = 1e-12;
  const double g = krp::gamma_rrf(p, 100, 1e6);
  EXPECT_TRUE(std::isfinite(g));
  EXPECT_GT(g, 0.0);
}

TEST(Solver, OutputSatisfiesInequalityAndPredecessorDoesNot) {
  oracle::Gen g(1);
  const std::vector<BoundVariant> variants{BoundVariant::rrf,      BoundVariant::rrf_q,      BoundVariant::hosvd,
                                           BoundVariant::sthosvd,  BoundVariant::subspace,   BoundVariant::appendix_a,
                                           BoundVariant::single_view};
  Index feasible = 0, infeasible = 0;
  for (int trial = 0; trial < 200; ++trial) {
    BoundParams p;
    p.r = g.uniform_int(1, 20);
    p.d = g.uniform_int(1, 4);
    p.delta = std::exp(g.uniform(std::log(1e-4), std::log(0.5)));
    p.eps = g.uniform(0.1, 0.9);
    p.K = g.uniform(1, 2);
    p.Cs = g.uniform(0.5, 1.5);
    p.M = std::floor(std::exp(g.uniform(std::log(10.0), std::log(1e9))));
    p.N = std::floor(std::exp(g.uniform(std::log(10.0), std::log(1e9))));
    for (Index j = 0; j < p.d; ++j) p.dims.push_back(std::exp(g.uniform(std::log(2.0), std::log(1e5))));
    const BoundVariant v = variants[static_cast<std::size_t>(trial) % variants.size()];
    const krp::SampleSize s = krp::solve_sample_size(p, v);
    const std::size_t solved = s.ell.size();
    for (std::size_t k = 0; k < solved; ++k) {
      const Real ell = s.ell[k];
      EXPECT_GE(ell, rhs(p, v, ell, static_cast<Index>(k), s.ell)) << krp::to_string(v) << " trial " << trial;
      EXPECT_LE(ell, cap(p, v, static_cast<Index>(k), s.ell));
      if (ell > 1) {
        EXPECT_LT(ell - 1, rhs(p, v, ell - 1, static_cast<Index>(k), s.ell)) << krp::to_string(v);
      }
    }
    if (s.feasible) {
      ++feasible;
    } else {
      ++infeasible;
      // the cap binds: the feasible set is a ray, so checking the cap suffices
      const Index k = static_cast<Index>(solved);
      const Real c = std::floor(cap(p, v, k, s.ell));
      EXPECT_LT(c, rhs(p, v, c, k, s.ell)) << krp::to_string(v) << " trial " << trial;
      EXPECT_FALSE(s.diagnostic.empty());
    }
  }
  EXPECT_GT(feasible, 0);
  EXPECT_GT(infeasible, 0);
}

TEST(Solver, RrfExampleFromCli) {
  BoundParams p = base();
  const krp::SampleSize s = krp::solve_sample_size(p, BoundVariant::rrf);
  ASSERT_TRUE(s.feasible);
  ASSERT_EQ(s.ell.size(), 1u);
  EXPECT_GE(Real(s.ell[0]), rhs(p, BoundVariant::rrf, s.ell[0], 0, {}));
  EXPECT_LT(Real(s.ell[0] - 1), rhs(p, BoundVariant::rrf, s.ell[0] - 1, 0, {}));
}

TEST(Solver, CapBindsGivesInfeasible) {
  BoundParams p = base();
  p.M = 100;
  p.N = 100;
  const krp::SampleSize s = krp::solve_sample_size(p, BoundVariant::rrf);
  EXPECT_FALSE(s.feasible);
  EXPECT_NE(s.diagnostic.find("cap"), std::string::npos);
}

TEST(Solver, AppendixAGrowsRoughlyQuadraticallyInR) {
  // at large r the sqrt(ell) term dominates and ell ~ r^2 ln^2(r/delta)
  BoundParams p;
  p.d = 1;
  p.delta = 1e-6;
  p.eps = 0.5;
  p.r = 32;
  const krp::SampleSize a = krp::solve_sample_size(p, BoundVariant::appendix_a);
  p.r = 64;
  const krp::SampleSize b = krp::solve_sample_size(p, BoundVariant::appendix_a);
  ASSERT_TRUE(a.feasible && b.feasible);
  // reference values from a 40-digit evaluation
  EXPECT_EQ(a.ell[0], 691225404987);
  EXPECT_EQ(b.ell[0], 2973982603628);
  EXPECT_LE(static_cast<double>(b.ell[0]) / static_cast<double>(a.ell[0]), 4.5);
}

TEST(Solver, SubspaceScalesWithInverseEpsSquared) {
  // exact 4x for the prefactor; the ln(8 ell / delta) factor adds a few percent
  BoundParams p = base();
  p.d = 1;
  p.eps = 0.5;
  const krp::SampleSize a = krp::solve_sample_size(p, BoundVariant::subspace);
  p.eps = 0.25;
  const krp::SampleSize b = krp::solve_sample_size(p, BoundVariant::subspace);
  ASSERT_TRUE(a.feasible && b.feasible);
  const double ratio = static_cast<double>(b.ell[0]) / static_cast<double>(a.ell[0]);
  EXPECT_NEAR(ratio, 4.0, 0.4);
}

TEST(Solver, HosvdSolvesEveryMode) {
  BoundParams p = base();
  p.d = 2;
  p.dims = {1000000, 2000000};
  const krp::SampleSize s = krp::solve_sample_size(p, BoundVariant::hosvd);
  ASSERT_TRUE(s.feasible);
  EXPECT_EQ(s.ell.size(), 2u);
  EXPECT_EQ(s.caps.size(), 2u);
  EXPECT_EQ(s.caps[0], 1000000.0);
}

TEST(Solver, SingleViewLeftExceedsRight) {
  BoundParams p = base();
  p.d = 2;
  const krp::SampleSize s = krp::solve_sample_size(p, BoundVariant::single_view);
  ASSERT_TRUE(s.feasible);
  ASSERT_EQ(s.ell.size(), 2u);
  EXPECT_GT(s.ell[1], s.ell[0]);
}

TEST(Solver, UnrepresentableSizesAreInfeasible) {
  BoundParams p = base();
  const krp::SampleSize s = krp::solve_sample_size(p, BoundVariant::single_view);
  EXPECT_FALSE(s.feasible);
  EXPECT_EQ(s.ell.size(), 1u);
}

TEST(Solver, InvalidParamsThrow) {
  BoundParams p = base();
  p.delta = 1.0;
  EXPECT_THROW(krp::solve_sample_size(p, BoundVariant::rrf), krp::DimensionError);
  p = base();
  p.d = 3;
  p.dims = {10, 10};
  EXPECT_THROW(krp::solve_sample_size(p, BoundVariant::hosvd), krp::DimensionError);
}

TEST(Variant, NamesRoundTrip) {
  for (auto v : {BoundVariant::rrf, BoundVariant::rrf_q, BoundVariant::hosvd, BoundVariant::sthosvd,
                 BoundVariant::subspace, BoundVariant::appendix_a, BoundVariant::single_view})
    EXPECT_EQ(krp::parse_bound_variant(krp::to_string(v)), v);
  EXPECT_FALSE(krp::parse_bound_variant("nope").has_value());
}

TEST(TuckerBound, ZeroTailsGiveZero) {
  std::vector<krp::Vector> s{krp::Vector::Ones(3), krp::Vector::Ones(3)};
  EXPECT_EQ(krp::tucker_bound(s, {3, 3}, {3, 3}, {3, 3}, base(), krp::TuckerVariant::hosvd), 0.0);
}

TEST(TuckerBound, OrderOneHasNoTail) {
  // a single-mode unfolding is one column, so any r >= 1 leaves no tail
  const krp::Vector s = (krp::Vector(1) << 3.0).finished();
  EXPECT_EQ(krp::tucker_bound({s}, {5}, {1}, {1}, base(), krp::TuckerVariant::hosvd), 0.0);
}

TEST(TuckerBound, EachModeTermIsLinearInItsTail) {
  const krp::Vector s0 = (krp::Vector(4) << 4, 3, 2, 1).finished();
  const krp::Vector s0x = (krp::Vector(4) << 4, 3, 4, 2).finished();
  const krp::Vector s1 = (krp::Vector(4) << 1, 1, 1, 1).finished();
  BoundParams p = base();
  const double b = krp::tucker_bound({s0, s1}, {4, 4}, {2, 4}, {2, 4}, p, krp::TuckerVariant::hosvd);
  const double bx = krp::tucker_bound({s0x, s1}, {4, 4}, {2, 4}, {2, 4}, p, krp::TuckerVariant::hosvd);
  EXPECT_NEAR(bx / b, 20.0 / 5.0, 1e-12);
}

TEST(TuckerBound, SpotValues) {
  // spectra 1/(j + 1 + i) on mode i, reference from a 40-digit evaluation
  const std::vector<Index> dims{4, 5, 6}, ranks{2, 2, 3}, ells{3, 3, 4};
  std::vector<krp::Vector> spectra;
  for (Index i = 0; i < 3; ++i) {
    const Index k = std::min<Index>(dims[static_cast<std::size_t>(i)], 120 / dims[static_cast<std::size_t>(i)]);
    krp::Vector s(k);
    for (Index j = 0; j < k; ++j) s(j) = 1.0 / static_cast<double>(j + 1 + i);
    spectra.push_back(s);
  }
  BoundParams p;
  p.delta = 0.1;
  EXPECT_NEAR(krp::tucker_bound(spectra, dims, ranks, ells, p, krp::TuckerVariant::hosvd), 82764.765971465389,
              1e-9 * 82764.8);
  EXPECT_NEAR(krp::tucker_bound(spectra, dims, ranks, ells, p, krp::TuckerVariant::sthosvd), 79409.209088737052,
              1e-9 * 79409.2);
}

TEST(EmbeddingCheck, DenseCaseHitsAlmostAlways) {
  const double f = krp::embedding_check(1, {64}, 2000, 0.2, 200, krp::SketchConfig{.seed = 3});
  EXPECT_GE(f, 0.99);
}

TEST(EmbeddingCheck, ZeroEpsNeverHits) {
  EXPECT_EQ(krp::embedding_check(2, {8, 8}, 40, 0.0, 50, krp::SketchConfig{.seed = 1}), 0.0);
}

TEST(EmbeddingCheck, FrequencyGrowsAlongLadder) {
  std::vector<double> f;
  for (Index ell : {30, 200, 1500}) f.push_back(krp::embedding_check(2, {8, 8}, ell, 0.5, 100, krp::SketchConfig{.seed = 7}));
  int inversions = 0;
  for (std::size_t k = 1; k < f.size(); ++k) inversions += f[k] < f[k - 1];
  EXPECT_LE(inversions, 1);
  EXPECT_GT(f.back(), f.front());
}

TEST(EmbeddingCheck, InvalidShapesThrow) {
  EXPECT_THROW(krp::embedding_check(10, {2, 3}, 20, 0.5, 5, krp::SketchConfig{}), krp::DimensionError);
  EXPECT_THROW(krp::embedding_check(3, {8, 8}, 2, 0.5, 5, krp::SketchConfig{}), krp::DimensionError);
  EXPECT_THROW(krp::embedding_check(1, {8, 8}, 2, 0.5, 0, krp::SketchConfig{}), krp::DimensionError);
}
