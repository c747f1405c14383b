#include "test_helpers.hpp"

using namespace nhqm;
using namespace nhqm::test;

namespace {

std::shared_ptr<const BiorthoEigensystem> decompose_shared(const Mat& H) {
  return std::make_shared<const BiorthoEigensystem>(biortho_decompose(H));
}

Mat open_chain(int n) {
  Mat H = Mat::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) H(i, i + 1) = H(i + 1, i) = -1.0;
  return H;
}

std::vector<int> lowest(const BiorthoEigensystem& es, int M) {
  std::vector<int> idx(es.dim());
  for (int i = 0; i < es.dim(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](int a, int b) { return es.E(a).real() < es.E(b).real(); });
  idx.resize(M);
  return idx;
}

void expect_matches_oracle(const Mat& H, const std::vector<int>& occ, double tol) {
  auto es = decompose_shared(H);
  const auto st = make_slater(es, occ);
  const HermitianCorrelator G(st);
  for (Eigen::Index i = 0; i < H.rows(); ++i)
    for (Eigen::Index j = 0; j < H.rows(); ++j) {
      const auto ref = fock_oracle(H, st.occupied, i, j);
      EXPECT_LT(std::abs(G(i, j) - ref.hermitian), tol) << i << "," << j;
      EXPECT_LT(std::abs(corr_bio(st, i, j) - ref.biorthogonal), tol) << i << "," << j;
    }
}

}  // namespace

TEST(GroundState, HermitianChainHalfFilling) {
  auto es = decompose_shared(open_chain(4));
  const auto states = ground_state(es, OccupationPolicy{});
  ASSERT_EQ(states.size(), 1u);
  ASSERT_EQ(states[0].M(), 2u);
  for (int v : states[0].occupied) EXPECT_LT(es->E(v).real(), 0.0);
}

TEST(GroundState, ZeroModeAverageGivesTwoStates) {
  auto es = decompose_shared(open_chain(5));  // E = -2 cos(k pi / 6) includes 0
  OccupationPolicy p;
  const auto avg = ground_state(es, p);
  ASSERT_EQ(avg.size(), 2u);
  EXPECT_EQ(avg[0].M(), avg[1].M() + 1);
  p.zero_mode = ZeroMode::Occupy;
  EXPECT_EQ(ground_state(es, p).front().M(), 3u);
  p.zero_mode = ZeroMode::Empty;
  EXPECT_EQ(ground_state(es, p).front().M(), 2u);
}

TEST(GroundState, UnbrokenRlmAverage) {
  RLMParams r;
  r.N = 40;
  auto es = decompose_shared(rlm_hamiltonian(r));
  const auto states = ground_state(es, OccupationPolicy{});
  ASSERT_EQ(states.size(), 2u);
  std::vector<int> diff;
  std::set_difference(states[0].occupied.begin(), states[0].occupied.end(),
                      states[1].occupied.begin(), states[1].occupied.end(), std::back_inserter(diff));
  ASSERT_EQ(diff.size(), 1u);
  EXPECT_LT(std::abs(es->E(diff[0])), 1e-10);
}

TEST(GroundState, ComplexPairPolicies) {
  RLMParams r;
  r.N = 40;
  r.gamma = std::polar(0.5, pi / 3);
  auto es = decompose_shared(rlm_hamiltonian(r));
  OccupationPolicy p;
  p.zero_mode = ZeroMode::Empty;
  auto count_complex = [&](const SlaterState& s, int sign) {
    int c = 0;
    for (int v : s.occupied)
      if (std::abs(es->E(v).imag()) > 1e-9 && (sign == 0 || (es->E(v).imag() > 0) == (sign > 0))) ++c;
    return c;
  };
  p.complex_pair = ComplexPairPolicy::None;
  EXPECT_EQ(count_complex(ground_state(es, p).front(), 0), 0);
  p.complex_pair = ComplexPairPolicy::Both;
  EXPECT_EQ(count_complex(ground_state(es, p).front(), 0), 2);
  p.complex_pair = ComplexPairPolicy::UpperOnly;
  EXPECT_EQ(count_complex(ground_state(es, p).front(), 1), 1);
  EXPECT_EQ(count_complex(ground_state(es, p).front(), 0), 1);
  p.complex_pair = ComplexPairPolicy::LowerOnly;
  EXPECT_EQ(count_complex(ground_state(es, p).front(), -1), 1);
  EXPECT_EQ(count_complex(ground_state(es, p).front(), 0), 1);
}

TEST(GroundState, FillingUnreachable) {
  auto es = decompose_shared(open_chain(4));
  OccupationPolicy p;
  p.filling = 0.75;
  EXPECT_THROW_KIND(ground_state(es, p), ErrorKind::FillingUnreachable);
  p.filling = 1.5;
  EXPECT_THROW_KIND(ground_state(es, p), ErrorKind::InvalidArgument);
}

TEST(Slater, RejectsBadIndices) {
  auto es = decompose_shared(open_chain(4));
  EXPECT_THROW_KIND(make_slater(es, {0, 0}), ErrorKind::InvalidArgument);
  EXPECT_THROW_KIND(make_slater(es, {4}), ErrorKind::InvalidArgument);
  EXPECT_THROW_KIND(corr_bio(make_slater(es, {0}), 0, 9), ErrorKind::InvalidArgument);
}

TEST(Correlators, SingleBasisState) {
  auto es = decompose_shared(diag_real({-1.0, 1.0}));
  const auto st = make_slater(es, {0});
  EXPECT_NEAR(std::abs(corr_bio(st, 0, 0) - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(corr_bio(st, 0, 1)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(corr_hermitian(st, 0, 0) - 1.0), 0.0, 1e-15);
}

TEST(Correlators, HermitianConventionsAgree) {
  std::mt19937_64 rng(7);
  const Mat X = random_complex(6, 6, rng);
  const Mat H = hermitize(X);
  auto es = decompose_shared(H);
  const auto st = make_slater(es, lowest(*es, 3));
  const HermitianCorrelator G(st);
  double trace = 0;
  for (int i = 0; i < 6; ++i) {
    trace += G(i, i).real();
    for (int j = 0; j < 6; ++j) EXPECT_LT(std::abs(G(i, j) - corr_bio(st, i, j)), 1e-12);
  }
  EXPECT_NEAR(trace, 3.0, 1e-12);
}

TEST(Correlators, MatrixFormMatchesEntries) {
  std::mt19937_64 rng(8);
  const Mat H = random_unbroken(6, rng);
  auto es = decompose_shared(H);
  const auto st = make_slater(es, lowest(*es, 3));
  const HermitianCorrelator G(st);
  const Mat Gm = G.matrix();
  const Mat Gb = corr_bio_matrix(st);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) {
      EXPECT_LT(std::abs(Gm(i, j) - G(i, j)), 1e-13);
      EXPECT_LT(std::abs(Gb(i, j) - corr_bio(st, i, j)), 1e-13);
    }
}

TEST(FockOracle, TwoSitesHermitian) {
  Mat H(2, 2);
  H << 0.3, 0.7, 0.7, -0.4;
  auto es = decompose_shared(H);
  const auto st = make_slater(es, {0});
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const cplx single = std::conj(es->R(i, 0)) * es->R(j, 0) / es->R.col(0).squaredNorm();
      const auto r = fock_oracle(H, st.occupied, i, j);
      EXPECT_LT(std::abs(r.hermitian - single), 1e-14);
      EXPECT_LT(std::abs(r.biorthogonal - single), 1e-14);
    }
}

TEST(FockOracle, TwoLevelBlocks) {
  const Mat A = two_level_hamiltonian(two_level(0.6, 0.4));
  const Mat B = two_level_hamiltonian(two_level(-0.3, 1.1));
  Mat H = Mat::Zero(4, 4);
  H.topLeftCorner(2, 2) = A;
  H.bottomRightCorner(2, 2) = 1.5 * B;
  H(1, 2) = H(2, 1) = 0.1;
  expect_matches_oracle(H, {0, 2}, 1e-12);
  expect_matches_oracle(H, {1, 3}, 1e-12);
}

TEST(FockOracle, RandomUnbrokenFourSites) {
  std::mt19937_64 rng(20240611);
  for (int rep = 0; rep < 5; ++rep) {
    const Mat H = random_unbroken(4, rng);
    for (std::vector<int> occ : {std::vector<int>{0, 1}, {0, 3}, {1, 2}}) expect_matches_oracle(H, occ, 1e-10);
  }
}

TEST(FockOracle, StaggeredChainSixSites) {
  ChainParams p;
  p.N = 6;
  p.g = 0.3;
  p.delta = 0.1;
  const Mat H = chain_hamiltonian(p);
  ASSERT_EQ(classify_spectrum(biortho_decompose(H)), SpectralClass::AllReal);
  auto es = decompose_shared(H);
  expect_matches_oracle(H, lowest(*es, 3), 1e-10);
}

TEST(FockOracle, RandomSweepUpToEightSites) {
  std::mt19937_64 rng(99);
  for (int n = 2; n <= 8; ++n) {
    const Mat H = random_unbroken(n, rng);
    for (int M = 1; M <= std::min(4, n); ++M) {
      auto es = decompose_shared(H);
      std::vector<int> occ(n);
      for (int i = 0; i < n; ++i) occ[i] = i;
      std::shuffle(occ.begin(), occ.end(), rng);
      occ.resize(M);
      const auto st = make_slater(es, occ);
      const HermitianCorrelator G(st);
      for (int i = 0; i < n; i += 2)
        for (int j = 0; j < n; j += 3) {
          const auto ref = fock_oracle(H, st.occupied, i, j);
          EXPECT_LT(std::abs(G(i, j) - ref.hermitian), 1e-10);
          EXPECT_LT(std::abs(corr_bio(st, i, j) - ref.biorthogonal), 1e-10);
        }
    }
  }
}

TEST(FockOracle, DimensionTooLarge) {
  EXPECT_THROW_KIND(fock_oracle(Mat::Identity(15, 15), std::vector<int>{0}, 0, 0),
                    ErrorKind::DimensionTooLarge);
}

TEST(Correlators, SumRulesAndPauliBound) {
  std::mt19937_64 rng(5);
  const Mat H = random_unbroken(8, rng);
  auto es = decompose_shared(H);
  const auto st = make_slater(es, lowest(*es, 4));
  const HermitianCorrelator G(st);
  cplx th = 0, tb = 0;
  for (int i = 0; i < 8; ++i) {
    const double n = G(i, i).real();
    EXPECT_GE(n, -1e-12);
    EXPECT_LE(n, 1.0 + 1e-12);
    th += G(i, i);
    tb += corr_bio(st, i, i);
  }
  EXPECT_LT(std::abs(th - 4.0), 1e-9);
  EXPECT_LT(std::abs(tb - 4.0), 1e-9);
}

TEST(Correlators, BrokenPhaseHermitianOccupanciesStayPhysical) {
  RLMParams r;
  r.N = 60;
  r.gamma = std::polar(0.5, 3 * pi / 8);
  auto es = decompose_shared(rlm_hamiltonian(r));
  for (auto cp : {ComplexPairPolicy::None, ComplexPairPolicy::Both, ComplexPairPolicy::UpperOnly}) {
    OccupationPolicy p;
    p.complex_pair = cp;
    for (const auto& st : ground_state(es, p)) {
      const Mat G = HermitianCorrelator(st).matrix();
      for (Eigen::Index i = 0; i < G.rows(); ++i) {
        EXPECT_GE(G(i, i).real(), -1e-10);
        EXPECT_LE(G(i, i).real(), 1.0 + 1e-10);
      }
    }
  }
}

TEST(Correlators, HermitianLimitCollapseIsLinear) {
  std::mt19937_64 rng(11);
  const Mat h = hermitize(random_complex(6, 6, rng)) / std::sqrt(6.0);
  const Mat X = random_complex(6, 6, rng) / std::sqrt(6.0);
  auto gap = [&](double eps) {
    const Mat S = identity(6) + eps * X;
    const Mat H = S * h * S.inverse();
    auto es = decompose_shared(H);
    const auto st = make_slater(es, lowest(*es, 3));
    return (HermitianCorrelator(st).matrix() - corr_bio_matrix(st)).cwiseAbs().maxCoeff();
  };
  const double a = gap(1e-3), b = gap(1e-4);
  EXPECT_LT(a, 1e-1);
  EXPECT_NEAR(a / b, 10.0, 1.0);
  EXPECT_LT(gap(0.0), 1e-12);
}

TEST(DotOccupancy, UnbrokenHalfFilling) {
  RLMParams r;
  r.N = 200;
  OccupationPolicy p;
  const auto row = dot_occupancy_point(r, p);
  EXPECT_EQ(row.spectral_class, SpectralClass::AllReal);
  EXPECT_EQ(row.states, 2);
  EXPECT_NEAR(row.hermitian, 0.5, 1e-10);
  EXPECT_NEAR(row.biorthogonal, 0.5, 1e-10);
}

TEST(DotOccupancy, BrokenPhaseLeavesPhysicalRange) {
  RLMParams r;
  r.N = 200;
  r.gamma = std::polar(0.2, 3 * pi / 8);
  OccupationPolicy both, none;
  both.complex_pair = ComplexPairPolicy::Both;
  none.complex_pair = ComplexPairPolicy::None;
  const auto rows = dot_occupancy_policies(r, {both, none});
  EXPECT_GT(rows[0].biorthogonal, 1.0);
  EXPECT_GT(rows[0].hermitian, 0.5);
  EXPECT_LE(rows[0].hermitian, 1.0);
  EXPECT_LT(rows[1].biorthogonal, 0.0);
  EXPECT_GE(rows[1].hermitian, 0.0);
  EXPECT_LT(rows[1].hermitian, 0.5);
}

TEST(DotOccupancy, ScanIsDeterministicAcrossThreads) {
  RLMParams r;
  r.N = 60;
  const std::vector<double> phis = linspace(0.0, pi / 2, 7);
  const auto a = dot_occupancy_scan(r, phis, OccupationPolicy{}, 1);
  const auto b = dot_occupancy_scan(r, phis, OccupationPolicy{}, 3);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].hermitian, b[k].hermitian);
    EXPECT_EQ(a[k].biorthogonal, b[k].biorthogonal);
  }
}
