#include "test_helpers.hpp"

#include <random>

using namespace nhqm;
using namespace nhqm::test;

TEST(Metric, EtaRIsIdentityForHermitian) {
  Mat H(2, 2);
  H << 0.3, cplx(0.1, 0.4), cplx(0.1, -0.4), -1.0;
  const auto eta = build_eta_r(biortho_decompose(H));
  EXPECT_LT((eta.matrix - identity(2)).norm(), 1e-12);
  EXPECT_EQ(eta.kind, MetricKind::EtaR);
  EXPECT_TRUE(eta.positive_definite);
}

TEST(Metric, EtaRTwoLevelClosedForm) {
  const auto eta = build_eta_r(biortho_decompose(two_level_hamiltonian(two_level(0.6))));
  Mat expect(2, 2);
  expect << 1.0, -0.6 * I, 0.6 * I, 1.0;
  expect /= 0.8;
  EXPECT_LT((eta.matrix - expect).norm(), 1e-12);
  const Eigen::VectorXd lam = hermitian_eigenvalues(eta.matrix);
  EXPECT_NEAR(lam(0), 0.5, 1e-12);
  EXPECT_NEAR(lam(1), 2.0, 1e-12);
}

TEST(Metric, EtaRInverseFromRightVectors) {
  const auto es = biortho_decompose(two_level_hamiltonian(two_level(0.6, 0.4)));
  EXPECT_LT((build_eta_r(es).matrix * eta_r_inverse(es) - identity(2)).norm(), 1e-10);
}

TEST(Metric, EtaRStaggeredChain) {
  ChainParams p;
  p.N = 20;
  const Mat H = chain_hamiltonian(p);
  const auto es = biortho_decompose(H);
  const auto eta = build_eta_r(es);
  EXPECT_LT(is_pseudo_hermitian(H, eta) * H.norm(), 1e-9);
  EXPECT_GT(hermitian_eigenvalues(eta.matrix).minCoeff(), 0.0);
  EXPECT_LT((eta.matrix * eta_r_inverse(es) - identity(20)).norm(), 1e-10);
}

TEST(Metric, EtaRRefusesComplexSpectrum) {
  EXPECT_THROW_KIND(build_eta_r(biortho_decompose(two_level_hamiltonian(two_level(1.25)))),
                    ErrorKind::SpectrumNotReal);
}

TEST(Metric, EtaCpTwoLevelClosedForm) {
  for (double z : {1.25, -1.25}) {
    const auto p = two_level(z);
    const auto es = align_to_closed_forms(biortho_decompose(two_level_hamiltonian(p)), two_level_closed_forms(p));
    const auto cp = build_eta_cp(es);
    EXPECT_LT((cp.matrix - (z > 0 ? 1.0 : -1.0) * pauli_x()).norm(), 1e-12) << "z=" << z;
    EXPECT_FALSE(cp.positive_definite);
    EXPECT_EQ(cp.kind, MetricKind::EtaCp);
  }
}

TEST(Metric, EtaCpIsGaugeDependentButAlwaysValid) {
  // Raw numeric gauge: still Hermitian, indefinite and a valid pseudo-Hermiticity metric.
  for (double z : {1.25, -1.25, 2.0}) {
    for (double phi : {0.0, pi / 3}) {
      const Mat H = two_level_hamiltonian(two_level(z, phi));
      const auto cp = build_eta_cp(biortho_decompose(H));
      EXPECT_LT(hermiticity_residual(cp.matrix), 1e-12);
      EXPECT_FALSE(cp.positive_definite);
      EXPECT_LT(is_pseudo_hermitian(H, cp), 1e-12);
    }
  }
}

TEST(Metric, EtaCpRlmImaginaryCoupling) {
  RLMParams p;
  p.N = 400;
  p.gamma = 0.2 * I;
  const Mat H = rlm_hamiltonian(p);
  const auto cp = build_eta_cp(biortho_decompose(H));
  EXPECT_LT(is_pseudo_hermitian(H, cp) * H.norm(), 1e-8);
}

TEST(Metric, EtaCpUnpairedFails) {
  Mat H = diag_real({1.0, 2.0});
  H(0, 0) = cplx(1.0, 0.5);
  EXPECT_THROW_KIND(build_eta_cp(biortho_decompose(H)), ErrorKind::UnpairedComplexEigenvalue);
}

TEST(Metric, PseudoHermiticityResiduals) {
  const Mat H = two_level_hamiltonian(two_level(0.6));
  EXPECT_LT(is_pseudo_hermitian(H, make_metric(pauli_x())), 1e-12);
  EXPECT_LT(is_pseudo_hermitian(H, build_eta_r(biortho_decompose(H))), 1e-12);
  EXPECT_GT(is_pseudo_hermitian(H, make_metric(pauli_z())), 0.1);
}

TEST(Metric, SingularMetricRefused) {
  EXPECT_THROW_KIND(is_pseudo_hermitian(identity(2), make_metric(diag_real({1.0, 0.0}))),
                    ErrorKind::SingularMetric);
}

TEST(Metric, SquareRoot) {
  EXPECT_LT((eta_sqrt(make_metric(identity(3))).matrix - identity(3)).norm(), 1e-14);
  for (double z : {0.6, -0.6, 0.3}) {
    const auto p = two_level(z, 0.7);
    const auto eta = build_eta_r(biortho_decompose(two_level_hamiltonian(p)));
    const auto s = eta_sqrt(eta);
    EXPECT_LT((s.matrix - *two_level_closed_forms(p).eta_r_sqrt).norm(), 1e-12) << "z=" << z;
    EXPECT_LT((s.matrix * s.matrix - eta.matrix).norm(), 1e-12);
    EXPECT_TRUE(s.positive_definite);
  }
}

TEST(Metric, SquareRootOfEtaCpRefused) {
  const auto cp = build_eta_cp(biortho_decompose(two_level_hamiltonian(two_level(1.25))));
  EXPECT_THROW_KIND(eta_sqrt(cp), ErrorKind::NotPositiveDefinite);
}

TEST(Metric, HermitianEquivalent) {
  Mat Hh(2, 2);
  Hh << 0.5, 0.2, 0.2, -0.1;
  EXPECT_LT((hermitian_equivalent(Hh, build_eta_r(biortho_decompose(Hh))) - Hh).norm(), 1e-12);

  const Mat H = two_level_hamiltonian(two_level(0.6));
  Mat expect(2, 2);
  expect << 0.0, 0.8, 0.8, 0.0;
  EXPECT_LT((hermitian_equivalent(H, build_eta_r(biortho_decompose(H))) - expect).norm(), 1e-12);
}

TEST(Metric, HermitianEquivalentIsIsospectral) {
  ChainParams p;
  p.N = 20;
  const Mat H = chain_hamiltonian(p);
  const auto es = biortho_decompose(H);
  const Mat h = hermitian_equivalent(H, build_eta_r(es));
  EXPECT_LT(hermiticity_residual(h), 1e-9);
  const Eigen::VectorXd w = hermitian_eigenvalues(h);
  std::vector<double> e;
  for (Eigen::Index i = 0; i < es.dim(); ++i) e.push_back(es.E(i).real());
  std::sort(e.begin(), e.end());
  for (Eigen::Index i = 0; i < w.size(); ++i) EXPECT_NEAR(w(i), e[i], 1e-9);
}

TEST(Metric, RandomUnbrokenIsospectralAndPositive) {
  std::mt19937_64 rng(17);
  for (int k = 0; k < 10; ++k) {
    const Mat H = random_unbroken(5, rng);
    const auto es = biortho_decompose(H);
    ASSERT_EQ(classify_spectrum(es), SpectralClass::AllReal);
    const auto eta = build_eta_r(es);
    EXPECT_GT(hermitian_eigenvalues(eta.matrix).minCoeff(), 0.0);
    const Eigen::VectorXd w = hermitian_eigenvalues(hermitian_equivalent(H, eta));
    std::vector<double> e;
    for (Eigen::Index i = 0; i < es.dim(); ++i) e.push_back(es.E(i).real());
    std::sort(e.begin(), e.end());
    for (Eigen::Index i = 0; i < w.size(); ++i) EXPECT_NEAR(w(i), e[i], 1e-9);
  }
}

TEST(Metric, ObservableCheck) {
  const Mat H = two_level_hamiltonian(two_level(0.6));
  const auto eta = build_eta_r(biortho_decompose(H));
  EXPECT_LT(pt_observable_check(H, eta), 1e-12);
  EXPECT_GT(pt_observable_check(pauli_z(), eta), 0.1);
  EXPECT_GT(pt_observable_check(diag_real({1.0, 0.0}), eta), 0.1);
}

TEST(Metric, ObservableFromHermitian) {
  std::mt19937_64 rng(23);
  const Mat H = random_unbroken(4, rng);
  const auto eta = build_eta_r(biortho_decompose(H));
  const Mat X = random_complex(4, 4, rng);
  const Mat O = pt_observable_from_hermitian(X + X.adjoint(), eta);
  EXPECT_LT(pt_observable_check(O, eta), 1e-10);
}

TEST(Metric, MakeMetricRejectsNonHermitian) {
  Mat A = identity(2);
  A(0, 1) = 1.0;
  EXPECT_THROW_KIND(make_metric(A), ErrorKind::InvalidArgument);
}
