#pragma once

#include <vector>

#include "dynamics.hpp"

namespace nhqm {

struct AncillaEmbedding {
  Mat H_s;
  MetricOperator eta_r;
  double c = 0;
  Mat g, g_inv;
  Mat A, B;
  Mat H_sa;  // basis ordering: (up (x) system, down (x) system)

  Eigen::Index n() const { return H_s.rows(); }
};

inline AncillaEmbedding build_embedding(const Mat& H_s) {
  require_square_finite(H_s, "H_s");
  const auto es = biortho_decompose(H_s);
  AncillaEmbedding emb;
  emb.H_s = H_s;
  emb.eta_r = build_eta_r(es);  // throws SpectrumNotReal in the broken phase
  const Eigen::VectorXd lam = hermitian_eigenvalues(emb.eta_r.matrix);
  require(lam.minCoeff() > 0, ErrorKind::NotPositiveDefinite, "eta_r is not positive definite");
  emb.c = lam.cwiseInverse().sum();

  const Mat g2 = emb.c * emb.eta_r.matrix - identity(emb.n());
  const double lo = hermitian_eigenvalues(g2).minCoeff();
  require(lo >= -1e-10, ErrorKind::GSquareNotPSD,
          "c eta_r - 1 has negative eigenvalue " + std::to_string(lo));
  emb.g = hermitian_function(g2, [](double x) { return cplx(std::sqrt(std::max(x, 0.0))); });
  // g is invertible whenever n >= 2, since then c * lambda_min > 1.
  emb.g_inv = solve_inverse(emb.g, "g");

  const Mat S_inv = solve_inverse(emb.g_inv + emb.g, "g^-1 + g");
  emb.A = (emb.g * H_s + H_s * emb.g_inv) * S_inv;
  // B carries H - g H g^-1. With a plus sign H_sa is not Hermitian and the worked two-level
  // B = sqrt(1 - z^2) diag(-r sin theta, r sin theta) is not reproduced.
  emb.B = I * (H_s - emb.g * H_s * emb.g_inv) * S_inv;

  const auto n = emb.n();
  emb.H_sa.resize(2 * n, 2 * n);
  emb.H_sa.topLeftCorner(n, n) = emb.A;
  emb.H_sa.bottomRightCorner(n, n) = emb.A;
  emb.H_sa.topRightCorner(n, n) = -I * emb.B;
  emb.H_sa.bottomLeftCorner(n, n) = I * emb.B;
  return emb;
}

// K [ |up> (x) psi + |down> (x) g psi ] with K = [c <psi|eta_r|psi>]^{-1/2}.
inline PureState embed_state(const AncillaEmbedding& emb, const PureState& psi_s) {
  const Vec& v = psi_s.amplitudes;
  require(v.size() == emb.n(), ErrorKind::DimensionMismatch, "state/embedding size mismatch");
  const double q = emb.c * v.dot(emb.eta_r.matrix * v).real();
  require(q > 0, ErrorKind::ZeroNormState, "cannot embed the zero state");
  const double K = 1.0 / std::sqrt(q);
  Vec out(2 * emb.n());
  out.head(emb.n()) = K * v;
  out.tail(emb.n()) = K * (emb.g * v);
  return PureState(std::move(out), "system-ancilla");
}

inline PureState postselect_up(const PureState& psi_sa) {
  const Vec& v = psi_sa.amplitudes;
  require(v.size() % 2 == 0 && v.size() > 0, ErrorKind::DimensionMismatch,
          "system-ancilla state must have even dimension");
  const Vec up = v.head(v.size() / 2);
  const double nrm = up.norm();
  require(nrm > 1e-300 && nrm > 1e-14 * v.norm(), ErrorKind::ZeroProjection,
          "ancilla spin-up projection vanishes");
  return PureState(up / nrm, "site");
}

// ||a - e^{i alpha} b|| with the phase of <b|a> taken as alpha.
inline double phase_aligned_distance(const Vec& a, const Vec& b) {
  const cplx ov = b.dot(a);
  const cplx ph = std::abs(ov) > 0 ? ov / std::abs(ov) : cplx(1.0);
  return (a - ph * b).norm();
}

namespace detail {

// e^{-iHt} for a Hermitian matrix through its eigendecomposition.
struct HermitianPropagator {
  Eigen::SelfAdjointEigenSolver<Mat> es;
  explicit HermitianPropagator(const Mat& H) : es(hermitize(H)) {}
  Vec apply(const Vec& v, double t) const {
    const Eigen::VectorXd& w = es.eigenvalues();
    Vec p(w.size());
    for (Eigen::Index i = 0; i < w.size(); ++i) p(i) = std::exp(-I * w(i) * t);
    return es.eigenvectors() * (p.asDiagonal() * (es.eigenvectors().adjoint() * v));
  }
};

}  // namespace detail

inline double verify_equivalence(const AncillaEmbedding& emb, const PureState& psi0,
                                 const std::vector<double>& t_grid) {
  const detail::HermitianPropagator Usa(emb.H_sa);
  const Propagator Us(biortho_decompose(emb.H_s));
  const PureState e0 = embed_state(emb, psi0);
  double worst = 0;
  for (double t : t_grid) {
    const Vec a = postselect_up(PureState(Usa.apply(e0.amplitudes, t))).amplitudes;
    const Vec b = Us.apply(psi0.amplitudes, t).normalized();
    worst = std::max(worst, phase_aligned_distance(a, b));
  }
  return worst;
}

// max over the grid of || lower block - g * upper block || for the evolved embedded state.
inline double subspace_invariance_residual(const AncillaEmbedding& emb, const PureState& psi0,
                                           const std::vector<double>& t_grid) {
  const detail::HermitianPropagator Usa(emb.H_sa);
  const PureState e0 = embed_state(emb, psi0);
  const auto n = emb.n();
  double worst = 0;
  for (double t : t_grid) {
    const Vec v = Usa.apply(e0.amplitudes, t);
    worst = std::max(worst, (v.tail(n) - emb.g * v.head(n)).norm());
  }
  return worst;
}

struct BrokenPhaseM {
  Mat M;
  double min_eig_M_minus_1;
};

// M(t) = m exp(i (H - H^dag) t); the exponent is Hermitian.
inline BrokenPhaseM broken_phase_M(const Mat& H_s, double m, double t) {
  require_square_finite(H_s, "H_s");
  const Mat X = I * (H_s - H_s.adjoint());
  BrokenPhaseM out;
  out.M = m * hermitian_function(X, [t](double x) { return cplx(std::exp(x * t)); });
  out.min_eig_M_minus_1 = hermitian_eigenvalues(out.M - identity(H_s.rows())).minCoeff();
  return out;
}

}  // namespace nhqm
