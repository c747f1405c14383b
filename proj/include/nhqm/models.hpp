#pragma once

#include <algorithm>
#include <optional>
#include <vector>

#include "biortho.hpp"
#include "common.hpp"

namespace nhqm {

// ---------------------------------------------------------------- two-level

struct TwoLevelParams {
  double r = 0.6;
  double s = 1.0;
  double theta = pi / 2;
  double phi = 0.0;

  double z() const { return r / s * std::sin(theta); }
};

inline Mat two_level_hamiltonian(const TwoLevelParams& p) {
  require(p.s != 0.0, ErrorKind::InvalidArgument, "two-level hopping s must be nonzero");
  Mat H(2, 2);
  H << p.r * std::exp(I * p.theta), p.s * std::exp(I * p.phi),
      p.s * std::exp(-I * p.phi), p.r * std::exp(-I * p.theta);
  return H;
}

// Closed-form eigensystem and metric objects of the two-level model.
// Index 0 is the "+" branch, index 1 the "-" branch.
struct TwoLevelClosedForms {
  double z = 0;
  bool unbroken = true;
  cplx E[2];
  Vec R[2];
  Vec L[2];
  std::optional<Mat> eta_r, eta_r_sqrt, h, eta_cp;
};

inline double sgn(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

inline void require_not_exceptional(double z) {
  require(std::abs(std::abs(z) - 1.0) >= 1e-12, ErrorKind::ExceptionalPoint,
          "|z| = 1 is an exceptional point");
}

inline TwoLevelClosedForms two_level_closed_forms(const TwoLevelParams& p) {
  require(p.s != 0.0, ErrorKind::InvalidArgument, "two-level hopping s must be nonzero");
  const double z = p.z();
  require_not_exceptional(z);
  TwoLevelClosedForms cf;
  cf.z = z;
  cf.unbroken = std::abs(z) < 1.0;
  const cplx eph = std::exp(I * p.phi);
  const double rc = p.r * std::cos(p.theta);
  const double sign[2] = {+1.0, -1.0};

  if (cf.unbroken) {
    const double w = std::sqrt(1.0 - z * z);
    for (int b = 0; b < 2; ++b) {
      cf.E[b] = rc + sign[b] * p.s * w;
      const cplx xr = I * z + sign[b] * w;
      const cplx xl = -I * z + sign[b] * w;
      cf.R[b] = Vec(2);
      cf.R[b] << eph * xr, 1.0;
      cf.R[b] /= std::sqrt(1.0 + xr * xr);
      cf.L[b] = Vec(2);
      cf.L[b] << eph * xl, 1.0;
      cf.L[b] /= std::sqrt(1.0 + xl * xl);
    }
    Mat eta(2, 2);
    eta << 1.0, -I * z * eph, I * z * std::conj(eph), 1.0;
    cf.eta_r = eta / w;
    // The off-diagonal of the square root carries sgn(z); without it the
    // square of the matrix reproduces eta_r only for z >= 0.
    const double a = std::sqrt(0.5 + 0.5 * w);
    const double bb = sgn(z) * std::sqrt(0.5 - 0.5 * w);
    Mat sq(2, 2);
    sq << a, -I * bb * eph, I * bb * std::conj(eph), a;
    cf.eta_r_sqrt = sq / std::pow(1.0 - z * z, 0.25);
    Mat h(2, 2);
    h << rc, p.s * w * eph, p.s * w * std::conj(eph), rc;
    cf.h = h;
  } else {
    const double w = std::sqrt(z * z - 1.0);
    for (int b = 0; b < 2; ++b) {
      cf.E[b] = rc + sign[b] * I * p.s * w;
      const double x = z + sign[b] * w;
      const cplx nrm = std::sqrt(cplx(1.0 - x * x));
      cf.R[b] = Vec(2);
      cf.R[b] << I * eph * x, 1.0;
      cf.R[b] /= nrm;
      cf.L[b] = Vec(2);
      cf.L[b] << -I * eph * x, 1.0;
      cf.L[b] /= std::conj(nrm);
    }
    Mat ecp(2, 2);
    ecp << 0.0, eph, std::conj(eph), 0.0;
    cf.eta_cp = sgn(z) * ecp;
  }
  return cf;
}

// Rescales each numeric eigenpair (R -> a R, L -> L / conj(a)) onto the closed-form
// eigenvector of the same energy. Biorthonormality and the projectors |R><L| are unchanged;
// gauge-dependent objects such as eta_cp can then be compared to their closed forms.
inline BiorthoEigensystem align_to_closed_forms(BiorthoEigensystem es, const TwoLevelClosedForms& cf) {
  require(es.dim() == 2, ErrorKind::DimensionMismatch, "two-level eigensystem expected");
  for (int b = 0; b < 2; ++b) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < 2; ++i)
      if (std::abs(es.E(i) - cf.E[b]) < std::abs(es.E(best) - cf.E[b])) best = i;
    const cplx a = es.R.col(best).dot(cf.R[b]) / es.R.col(best).squaredNorm();
    es.R.col(best) *= a;
    es.L.col(best) /= std::conj(a);
  }
  return es;
}

// Hermitian-convention occupancy of the left site starting from |up>.
inline double two_level_occupancy_closed(const TwoLevelParams& p, double t) {
  const double z = p.z();
  require_not_exceptional(z);
  if (std::abs(z) < 1.0) {
    const double w = std::sqrt(1.0 - z * z);
    const double x = 2.0 * w * p.s * t;
    const double c = std::cos(x), sn = std::sin(x);
    const double num = 0.5 * (1.0 + c) - z * z * c + z * w * sn;
    const double den = 1.0 - z * z * c + z * w * sn;
    return num / den;
  }
  const double w = std::sqrt(z * z - 1.0);
  const double x = 2.0 * w * p.s * t;
  const double ap = z * z + z * w, am = z * z - z * w;
  // Both numerator and denominator divided by exp(x) to stay finite at large t.
  if (x >= 0) {
    const double e1 = std::exp(-x), e2 = std::exp(-2.0 * x);
    return ((ap - 0.5) + e2 * (am - 0.5) - e1) / (ap + e2 * am - 2.0 * e1);
  }
  const double e1 = std::exp(x), e2 = std::exp(2.0 * x);
  return (e2 * (ap - 0.5) + (am - 0.5) - e1) / (e2 * ap + am - 2.0 * e1);
}

inline double two_level_occupancy_plateau(const TwoLevelParams& p) {
  const double z = p.z();
  require(std::abs(z) > 1.0, ErrorKind::InvalidArgument, "plateau exists only for |z| > 1");
  const double a = z * z + z * std::sqrt(z * z - 1.0);
  return (a - 0.5) / a;
}

// Norm of e^{-iHt}|up>, unbroken phase.
inline double two_level_norm_closed(const TwoLevelParams& p, double t) {
  const double z = p.z();
  require(std::abs(z) < 1.0, ErrorKind::InvalidArgument, "closed-form norm needs |z| < 1");
  const double w = std::sqrt(1.0 - z * z);
  const double x = 2.0 * p.s * w * t;
  return (1.0 - z * z * std::cos(x) + z * w * std::sin(x)) / (1.0 - z * z);
}

// ---------------------------------------------------------------- PT operations

// Site permutation perm[i] = image of site i.
inline Mat permutation_matrix(const std::vector<Eigen::Index>& perm) {
  const auto n = static_cast<Eigen::Index>(perm.size());
  Mat P = Mat::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) P(perm[i], i) = 1.0;
  return P;
}

// || (PK) H (PK)^-1 - H ||_F with K complex conjugation.
inline double pt_residual(const Mat& H, const std::vector<Eigen::Index>& perm) {
  const Mat P = permutation_matrix(perm);
  return (P * H.conjugate() * P.transpose() - H).norm();
}

inline std::vector<Eigen::Index> two_level_parity() { return {1, 0}; }

// ---------------------------------------------------------------- resonant level

struct RLMParams {
  int N = 2018;
  double J = 1.0;
  cplx gamma{0.2 * std::cos(pi / 6), 0.2 * std::sin(pi / 6)};

  Eigen::Index dim() const { return N + 1; }
  Eigen::Index dot() const { return N / 2; }  // storage index of site j = 0
  double gamma_tilde() const { return (gamma * gamma).real(); }
};

inline void validate(const RLMParams& p) {
  require(p.N > 0 && p.N % 2 == 0, ErrorKind::InvalidArgument, "RLM N must be even and positive");
  require(p.J > 0, ErrorKind::InvalidArgument, "RLM J must be positive");
  require(p.gamma.real() >= 0 && p.gamma.imag() >= 0, ErrorKind::InvalidArgument,
          "RLM gamma must have non-negative real and imaginary parts");
}

// Sites j = -N/2 .. N/2 stored at index j + N/2. Hops are symmetric (not conjugated),
// so the matrix is complex symmetric and H^dag = H(gamma -> gamma*).
inline Mat rlm_hamiltonian(const RLMParams& p) {
  validate(p);
  const Eigen::Index n = p.dim(), d = p.dot();
  Mat H = Mat::Zero(n, n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    cplx t = -p.J;
    if (i == d - 1) t = -p.gamma;
    if (i == d) t = -std::conj(p.gamma);
    H(i, i + 1) = H(i + 1, i) = t;
  }
  return H;
}

inline std::vector<Eigen::Index> rlm_parity(const RLMParams& p) {
  std::vector<Eigen::Index> perm(p.dim());
  for (Eigen::Index i = 0; i < p.dim(); ++i) perm[i] = p.dim() - 1 - i;
  return perm;
}

enum class BoundRegime { NoBound, RealPair, ImaginaryPair };

inline const char* to_string(BoundRegime r) {
  switch (r) {
    case BoundRegime::NoBound: return "NoBound";
    case BoundRegime::RealPair: return "RealPair";
    case BoundRegime::ImaginaryPair: return "ImaginaryPair";
  }
  return "?";
}

struct BoundStatePrediction {
  BoundRegime regime = BoundRegime::NoBound;
  std::vector<cplx> energies;  // (E_+, E_-)
  std::optional<double> xi;
};

inline BoundStatePrediction rlm_bound_state_predictions(const RLMParams& p) {
  const double gr = p.gamma.real(), gi = p.gamma.imag();
  const double J2 = p.J * p.J;
  const double two_gt = 2.0 * p.gamma_tilde();  // gamma^2 + gamma*^2
  BoundStatePrediction out;
  if (gr > std::sqrt(J2 + gi * gi)) {
    out.regime = BoundRegime::RealPair;
    const double e = two_gt / std::sqrt(two_gt - J2);
    out.energies = {cplx(-e), cplx(e)};
  } else if (gi > gr) {
    out.regime = BoundRegime::ImaginaryPair;
    const double e = two_gt / std::sqrt(J2 - two_gt);
    out.energies = {-I * e, I * e};
  } else {
    return out;
  }
  const double gamma_plus = two_gt - J2;
  out.xi = 2.0 / std::log(std::abs(gamma_plus / J2));
  return out;
}

// Real momenta k in (0, pi) solving e^{ikN} = (G - J^2 e^{-2ik}) / (G - J^2 e^{2ik}).
// With real G the right side is a pure phase e^{2i theta(k)}, theta = arg(G - J^2 e^{-2ik}),
// so roots are zeros of sin(kN/2 - theta(k)).
inline std::vector<double> rlm_scattering_momenta(const RLMParams& p, int lambda) {
  validate(p);
  require(lambda == 1 || lambda == -1, ErrorKind::InvalidArgument, "lambda must be +1 or -1");
  const double J2 = p.J * p.J;
  const double G = (1.0 + lambda) * p.gamma_tilde() - J2;
  const double halfN = 0.5 * p.N;
  auto theta = [&](double k) {
    if (lambda == -1) return -k;  // G = -J^2: arg(-J^2(1 + e^{-2ik})) = -k on (0, pi)
    return std::arg(G - J2 * std::exp(-2.0 * I * k));
  };
  auto f = [&](double k) { return std::sin(halfN * k - theta(k)); };

  // k = 0 and k = pi are trivial roots of the phase equation with vanishing wavefunction.
  const int nb = 10 * p.N;
  const double edge = 1e-9;
  std::vector<double> roots;
  double a = edge, fa = f(a);
  for (int b = 1; b <= nb; ++b) {
    const double bk = (b == nb) ? pi - edge : pi * b / nb;
    const double fb = f(bk);
    if (fa == 0.0) {
      roots.push_back(a);
    } else if (fa * fb < 0) {
      double lo = a, hi = bk, flo = fa;
      while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm < 0) == (flo < 0)) { lo = mid; flo = fm; } else { hi = mid; }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    a = bk;
    fa = fb;
  }

  std::size_t expected = static_cast<std::size_t>(p.N / 2);
  if (lambda == 1) {
    const auto bs = rlm_bound_state_predictions(p);
    expected = p.N / 2 + 1 - (bs.regime == BoundRegime::NoBound ? 0 : 2);
  }
  require(roots.size() == expected, ErrorKind::RootCountMismatch,
          "found " + std::to_string(roots.size()) + " momenta, expected " + std::to_string(expected));
  return roots;
}

// ---------------------------------------------------------------- staggered chain

struct ChainParams {
  int N = 100;
  double J = 1.0;
  double g = 0.2;
  double delta = 0.1;
  double delta_s = 0.0;
};

inline void validate(const ChainParams& p) {
  require(p.N > 0 && p.N % 2 == 0, ErrorKind::InvalidArgument, "chain N must be even and positive");
  require(p.J > 0 && p.g >= 0 && p.delta >= 0 && p.delta_s >= 0, ErrorKind::InvalidArgument,
          "chain parameters must be non-negative with J > 0");
}

// Sites j = 1..N stored at j - 1, periodic. Bond (j, j+1) carries (J + i delta (-1)^j)/2 in
// both directions, onsite g (-1)^j.
inline Mat chain_hamiltonian(const ChainParams& p) {
  validate(p);
  const Eigen::Index n = p.N;
  Mat H = Mat::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double par = ((i + 1) % 2 == 0) ? 1.0 : -1.0;
    H(i, i) += p.g * par;
    const cplx t = 0.5 * (p.J + I * p.delta * par);
    const Eigen::Index j = (i + 1) % n;
    H(i, j) += t;
    H(j, i) += t;
  }
  return H;
}

// Reflection through site 1, which keeps site parity and flips bond parity.
inline std::vector<Eigen::Index> chain_parity(const ChainParams& p) {
  std::vector<Eigen::Index> perm(p.N);
  for (Eigen::Index i = 0; i < p.N; ++i) perm[i] = (p.N - i) % p.N;
  return perm;
}

inline std::pair<cplx, cplx> chain_dispersion(const ChainParams& p, double k) {
  const double c = std::cos(k);
  const cplx e = std::sqrt(cplx((p.J * p.J + p.delta * p.delta) * c * c + p.g * p.g -
                                p.delta * p.delta));
  return {e, -e};
}

// 2x2 block of H in the (|k>, |k+pi>) basis with |k> = sum_j e^{ikj}|j>/sqrt(N).
inline Eigen::Matrix2cd chain_momentum_block(const ChainParams& p, double k) {
  Eigen::Matrix2cd b;
  b << p.J * std::cos(k), p.g + p.delta * std::sin(k), p.g - p.delta * std::sin(k),
      -p.J * std::cos(k);
  return b;
}

// Allowed momenta k = 2 pi m / N for m = 0 .. N/2 - 1 (each block covers k and k + pi).
inline std::vector<double> chain_block_momenta(const ChainParams& p) {
  std::vector<double> ks(p.N / 2);
  for (int m = 0; m < p.N / 2; ++m) ks[m] = 2.0 * pi * m / p.N;
  return ks;
}

}  // namespace nhqm
