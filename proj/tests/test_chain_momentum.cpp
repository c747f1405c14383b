#include "test_helpers.hpp"

using namespace nhqm;
using namespace nhqm::test;

namespace {

ChainParams critical_chain(int N, double g, double delta_s) {
  ChainParams p;
  p.N = N;
  p.g = g;
  p.delta_s = delta_s;
  p.delta = g - delta_s;
  return p;
}

}  // namespace

TEST(ChainMomentum, MatchesDenseCorrelators) {
  const ChainParams p = critical_chain(102, 0.2, 0.05);
  auto es = std::make_shared<const BiorthoEigensystem>(biortho_decompose(chain_hamiltonian(p)));
  OccupationPolicy pol;
  pol.zero_mode = ZeroMode::Empty;
  const auto states = ground_state(es, pol);
  ASSERT_EQ(states.size(), 1u);
  ASSERT_EQ(states[0].M(), 51u);
  const HermitianCorrelator G(states[0]);
  const auto blocks = chain_occupied_blocks(p);
  for (long d = 0; d < 30; ++d) {
    const auto c = chain_correlator(blocks, p.N, d);
    EXPECT_LT(std::abs(c.herm - G(d, 0)), 1e-12) << "d=" << d;
    EXPECT_LT(std::abs(c.bio - corr_bio(states[0], d, 0)), 1e-11) << "d=" << d;
  }
}

TEST(ChainMomentum, TranslationByTwoSites) {
  const ChainParams p = critical_chain(42, 0.3, 0.1);
  auto es = std::make_shared<const BiorthoEigensystem>(biortho_decompose(chain_hamiltonian(p)));
  OccupationPolicy pol;
  pol.zero_mode = ZeroMode::Empty;
  const auto st = ground_state(es, pol).front();
  const Mat G = HermitianCorrelator(st).matrix();
  const Mat Gb = corr_bio_matrix(st);
  for (int l = 0; l < 4; ++l)
    for (int d = 0; d < 10; ++d) {
      EXPECT_LT(std::abs(G(l + d, l) - G(l + 2 + d, l + 2)), 1e-10);
      EXPECT_LT(std::abs(Gb(l + d, l) - Gb(l + 2 + d, l + 2)), 1e-10);
    }
}

TEST(ChainMomentum, SiteDensityIsPhysical) {
  const ChainParams p = critical_chain(1002, 0.2, 1e-4);
  const auto blocks = chain_occupied_blocks(p);
  ASSERT_EQ(blocks.size(), 501u);
  const auto c = chain_correlator(blocks, p.N, 0);
  EXPECT_GT(c.herm.real(), 0.0);
  EXPECT_LT(c.herm.real(), 1.0);
  EXPECT_LT(std::abs(c.herm.imag()), 1e-14);
}

TEST(ChainMomentum, RequiresGapSide) {
  ChainParams p;
  p.N = 102;
  p.g = 0.1;
  p.delta = 0.2;
  EXPECT_THROW_KIND(chain_occupied_blocks(p), ErrorKind::InvalidArgument);
}

TEST(ChainMomentum, HermitianSlopesAtLongRange) {
  const ChainParams p = critical_chain(20002, 0.2, 1e-8);
  const auto rows = critical_green_scan(p, p.N / 16, 1);
  const auto s = loglog_slope(rows, 25, p.N / 16, [](const CriticalRow& r) { return r.S; });
  const auto f = loglog_slope(rows, 25, p.N / 16, [](const CriticalRow& r) { return r.F; });
  EXPECT_NEAR(s.slope, -3.0, 0.15);
  EXPECT_NEAR(f.slope, -2.0, 0.15);
  EXPECT_TRUE(std::isnan(rows.front().dlog_S));
  EXPECT_FALSE(std::isnan(rows[5].dlog_S));
}

TEST(ChainMomentum, ScanIsThreadIndependent) {
  const ChainParams p = critical_chain(2002, 0.2, 1e-6);
  const auto a = critical_green_scan(p, 100, 1);
  const auto b = critical_green_scan(p, 100, 4);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].S, b[i].S);
    EXPECT_EQ(a[i].F_pt, b[i].F_pt);
  }
}

TEST(ChainMomentum, ScanBounds) {
  const ChainParams p = critical_chain(102, 0.2, 1e-3);
  EXPECT_THROW_KIND(critical_green_scan(p, 0), ErrorKind::InvalidArgument);
  EXPECT_THROW_KIND(critical_green_scan(p, 60), ErrorKind::InvalidArgument);
}

TEST(Sizes, GeometricLadderAvoidsHalfPi) {
  const auto s = geometric_sizes(100, 100000, 1.25);
  ASSERT_GT(s.size(), 10u);
  EXPECT_GE(s.front(), 100);
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_EQ(s[i] % 4, 2);
    if (i) EXPECT_GT(s[i], s[i - 1]);
  }
  EXPECT_THROW_KIND(geometric_sizes(100, 50, 1.25), ErrorKind::InvalidArgument);
  EXPECT_THROW_KIND(geometric_sizes(100, 500, 1.0), ErrorKind::InvalidArgument);
}

TEST(Fits, LinearFitExactLine) {
  const std::vector<double> x{1, 2, 3, 4}, y{1.5, 3.5, 5.5, 7.5};
  const auto f = linear_fit(x, y);
  EXPECT_NEAR(f.slope, 2.0, 1e-14);
  EXPECT_NEAR(f.intercept, -0.5, 1e-14);
  EXPECT_NEAR(f.r2, 1.0, 1e-14);
}

TEST(Fits, LogLogSlopeOfPowerLaw) {
  std::vector<CriticalRow> rows;
  for (int m = 1; m <= 50; ++m) {
    CriticalRow r;
    r.m = m;
    r.S = 3.0 * std::pow(m, -2.5);
    rows.push_back(r);
  }
  const auto f = loglog_slope(rows, 10, 40, [](const CriticalRow& r) { return r.S; });
  EXPECT_EQ(f.points, 31);
  EXPECT_NEAR(f.slope, -2.5, 1e-12);
  EXPECT_NEAR(std::exp(f.intercept), 3.0, 1e-11);
  EXPECT_TRUE(std::isnan(loglog_slope(rows, 60, 70, [](const CriticalRow& r) { return r.S; }).slope));
}

TEST(Convergence, MonotoneInDeltaS) {
  const auto sizes = geometric_sizes(502, 200000, 1.25);
  const auto a = convergence_in_N(0.2, 1e-3, {10, 100}, sizes, 1e-3);
  const auto b = convergence_in_N(0.2, 1e-4, {10, 100}, sizes, 1e-3);
  EXPECT_GT(a.N_converged, 0);
  EXPECT_GT(b.N_converged, a.N_converged);
  EXPECT_LT(b.N_converged, sizes.back());
}
