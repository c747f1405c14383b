#include "test_helpers.hpp"

#include <random>

using namespace nhqm;
using namespace nhqm::test;

TEST(Ancilla, TwoLevelConstants) {
  const auto emb = build_embedding(two_level_hamiltonian(two_level(0.6)));
  EXPECT_NEAR(emb.c, 2.5, 1e-12);
  EXPECT_LT((emb.g - emb.eta_r.matrix).norm(), 1e-12);
  EXPECT_LT((emb.g * emb.g - (emb.c * emb.eta_r.matrix - identity(2))).norm(), 1e-12);
}

TEST(Ancilla, TwoLevelAandB) {
  const auto emb = build_embedding(two_level_hamiltonian(two_level(0.6)));
  EXPECT_LT((emb.A - 0.64 * pauli_x()).norm(), 1e-12);
  EXPECT_LT((emb.B - diag_real({-0.48, 0.48})).norm(), 1e-12);
  EXPECT_LT((emb.H_sa - (kron(identity(2), emb.A) + kron(pauli_y(), emb.B))).norm(), 1e-12);
  EXPECT_LT(hermiticity_residual(emb.H_sa), 1e-12);
  const Eigen::VectorXd w = hermitian_eigenvalues(emb.H_sa);
  const double expect[] = {-0.8, -0.8, 0.8, 0.8};
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(w(i), expect[i], 1e-12);
}

TEST(Ancilla, EmbeddedState) {
  const auto emb = build_embedding(two_level_hamiltonian(two_level(0.6)));
  const Vec e = embed_state(emb, PureState(up())).amplitudes;
  Vec expect(4);
  expect << 0.8, 0.0, 1.0, 0.6 * I;
  expect /= std::sqrt(2.0);
  EXPECT_LT((e - expect).norm(), 1e-12);
  EXPECT_NEAR(e.norm(), 1.0, 1e-12);
}

TEST(Ancilla, HermitianLimit) {
  const auto emb = build_embedding(two_level_hamiltonian(two_level(0.0)));
  EXPECT_NEAR(emb.c, 2.0, 1e-12);
  EXPECT_LT((emb.g - identity(2)).norm(), 1e-12);
  const Vec e = embed_state(emb, PureState(up())).amplitudes;
  Vec expect(4);
  expect << 1.0, 0.0, 1.0, 0.0;
  EXPECT_LT((e - expect / std::sqrt(2.0)).norm(), 1e-12);
}

TEST(Ancilla, EmbeddingIsNormalized) {
  std::mt19937_64 rng(59);
  const auto emb = build_embedding(random_unbroken(5, rng));
  for (int k = 0; k < 5; ++k)
    EXPECT_NEAR(embed_state(emb, PureState(3.7 * random_state(5, rng))).amplitudes.norm(), 1.0, 1e-12);
}

TEST(Ancilla, PostSelection) {
  Vec v = Vec::Zero(4);
  v(0) = 1.0;
  EXPECT_LT((postselect_up(PureState(v)).amplitudes - up()).norm(), 1e-15);
  const auto emb = build_embedding(two_level_hamiltonian(two_level(0.6)));
  EXPECT_LT((postselect_up(embed_state(emb, PureState(up()))).amplitudes - up()).norm(), 1e-12);
  Vec low = Vec::Zero(4);
  low(3) = 1.0;
  EXPECT_THROW_KIND(postselect_up(PureState(low)), ErrorKind::ZeroProjection);
}

TEST(Ancilla, Equivalence) {
  const auto emb = build_embedding(two_level_hamiltonian(two_level(0.6)));
  EXPECT_LT(verify_equivalence(emb, PureState(up()), {0.0}), 1e-14);
  EXPECT_LT(verify_equivalence(emb, PureState(up()), linspace(0.0, 10.0, 50)), 1e-10);
  std::mt19937_64 rng(61);
  for (int k = 0; k < 5; ++k) {
    const auto e = build_embedding(random_unbroken(6, rng));
    const PureState psi(random_state(6, rng));
    EXPECT_LT(verify_equivalence(e, psi, linspace(0.0, 10.0, 50)), 1e-9);
    EXPECT_LT(subspace_invariance_residual(e, psi, linspace(0.0, 10.0, 50)), 1e-10);
  }
}

TEST(Ancilla, BrokenPhaseRefused) {
  EXPECT_THROW_KIND(build_embedding(two_level_hamiltonian(two_level(1.25))), ErrorKind::SpectrumNotReal);
}

TEST(Ancilla, RightEigenvectorsEmbedToEigenvectors) {
  std::mt19937_64 rng(67);
  const Mat H = random_unbroken(4, rng);
  const auto emb = build_embedding(H);
  const auto es = biortho_decompose(H);
  for (Eigen::Index nu = 0; nu < es.dim(); ++nu) {
    const Vec e = embed_state(emb, PureState(es.R.col(nu))).amplitudes;
    EXPECT_LT((emb.H_sa * e - es.E(nu) * e).norm(), 1e-10);
    // K = c^{-1/2} because <R|eta_r|R> = 1
    EXPECT_NEAR(std::abs(e(0) / es.R(0, nu)), 1.0 / std::sqrt(emb.c), 1e-10);
  }
}

TEST(Ancilla, NormPreservingEquationOfMotion) {
  // i d/dt phi = H phi - (1/2) <phi|(H - H^dag)|phi> phi for phi = U psi / |U psi|
  const Mat H = two_level_hamiltonian(two_level(0.6, 0.4));
  const Propagator U(biortho_decompose(H));
  auto phi = [&](double t) { return Vec(U.apply(up(), t).normalized()); };
  auto err = [&](double t, double h) {
    const Vec p = phi(t);
    const Vec lhs = I * (phi(t + h) - phi(t - h)) / (2 * h);
    const Vec rhs = H * p - 0.5 * p.dot((H - H.adjoint()) * p) * p;
    return (lhs - rhs).norm();
  };
  for (double t : {0.3, 1.1, 2.5}) {
    const double e1 = err(t, 1e-2), e2 = err(t, 5e-3);
    EXPECT_LT(e1, 1e-3);
    EXPECT_NEAR(e1 / e2, 4.0, 0.2) << "t=" << t;
  }
}

TEST(Ancilla, BrokenPhaseM) {
  const Mat H = two_level_hamiltonian(two_level(1.25));
  const double tau = 2.0;
  const double m = std::exp(2 * 1.25 * tau) * 1.01;
  const auto M = broken_phase_M(H, m, 0.7);
  EXPECT_LT((M.M - m * diag_real({std::exp(-2 * 1.25 * 0.7), std::exp(2 * 1.25 * 0.7)})).norm(), 1e-9 * m);
  for (double t : linspace(0.0, tau, 21)) EXPECT_GT(broken_phase_M(H, m, t).min_eig_M_minus_1, 0.0);
  EXPECT_LT(broken_phase_M(H, m, 1.5 * tau).min_eig_M_minus_1, 0.0);
}
