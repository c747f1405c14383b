#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "biortho.hpp"
#include "models.hpp"
#include "parallel.hpp"

namespace nhqm {

enum class ZeroMode { Occupy, Empty, Average };
enum class ComplexPairPolicy { None, Both, UpperOnly, LowerOnly };

inline const char* to_string(ZeroMode z) {
  switch (z) {
    case ZeroMode::Occupy: return "Occupy";
    case ZeroMode::Empty: return "Empty";
    case ZeroMode::Average: return "Average";
  }
  return "?";
}

inline const char* to_string(ComplexPairPolicy c) {
  switch (c) {
    case ComplexPairPolicy::None: return "None";
    case ComplexPairPolicy::Both: return "Both";
    case ComplexPairPolicy::UpperOnly: return "UpperOnly";
    case ComplexPairPolicy::LowerOnly: return "LowerOnly";
  }
  return "?";
}

struct OccupationPolicy {
  double filling = 0.5;  // target particle number = floor(filling * n)
  ZeroMode zero_mode = ZeroMode::Average;
  ComplexPairPolicy complex_pair = ComplexPairPolicy::None;
  double energy_unit = 1.0;  // zero modes are |E| < 1e-10 * energy_unit
};

struct SlaterState {
  std::shared_ptr<const BiorthoEigensystem> es;
  std::vector<int> occupied;  // ascending eigenindices

  std::size_t M() const { return occupied.size(); }
};

inline SlaterState make_slater(std::shared_ptr<const BiorthoEigensystem> es, std::vector<int> occ) {
  std::sort(occ.begin(), occ.end());
  require(std::adjacent_find(occ.begin(), occ.end()) == occ.end(), ErrorKind::InvalidArgument,
          "occupied indices must be distinct");
  for (int v : occ)
    require(v >= 0 && v < es->dim(), ErrorKind::InvalidArgument, "occupied index out of range");
  return SlaterState{std::move(es), std::move(occ)};
}

// Fills the lowest real levels with E < -tol, at most floor(filling * n) of them. Zero modes
// and conjugate-pair members are then added per policy, so the particle number can differ
// from the target by the number of those states. Average returns two states, with and
// without the zero modes. FillingUnreachable is raised when the target exceeds all negative,
// zero and complex levels together, since reaching it would need positive-energy states.
inline std::vector<SlaterState> ground_state(std::shared_ptr<const BiorthoEigensystem> es,
                                             const OccupationPolicy& policy) {
  require(policy.filling >= 0 && policy.filling <= 1, ErrorKind::InvalidArgument,
          "filling must lie in [0, 1]");
  const double ztol = 1e-10 * policy.energy_unit;
  std::vector<int> negative, zero, upper, lower;
  for (Eigen::Index i = 0; i < es->dim(); ++i) {
    const cplx e = es->E(i);
    if (es->tag[i] == EigTag::Real) {
      if (std::abs(e.real()) < ztol) zero.push_back(static_cast<int>(i));
      else if (e.real() < 0) negative.push_back(static_cast<int>(i));
    } else {
      (e.imag() > 0 ? upper : lower).push_back(static_cast<int>(i));
    }
  }
  const auto target = static_cast<std::size_t>(std::floor(policy.filling * static_cast<double>(es->dim()) + 1e-12));
  const std::size_t available = negative.size() + zero.size() + upper.size() + lower.size();
  require(target <= available, ErrorKind::FillingUnreachable,
          "filling target " + std::to_string(target) + " exceeds the " + std::to_string(available) +
              " non-positive or complex levels");

  // eigenvalues are sorted by real part, so `negative` is already in ascending energy
  std::vector<int> base(negative.begin(),
                        negative.begin() + static_cast<std::ptrdiff_t>(std::min(target, negative.size())));
  auto add = [&](const std::vector<int>& v) { base.insert(base.end(), v.begin(), v.end()); };
  switch (policy.complex_pair) {
    case ComplexPairPolicy::None: break;
    case ComplexPairPolicy::Both: add(upper); add(lower); break;
    case ComplexPairPolicy::UpperOnly: add(upper); break;
    case ComplexPairPolicy::LowerOnly: add(lower); break;
  }
  std::vector<SlaterState> out;
  if (zero.empty() || policy.zero_mode == ZeroMode::Empty) {
    out.push_back(make_slater(es, base));
  } else if (policy.zero_mode == ZeroMode::Occupy) {
    auto occ = base;
    occ.insert(occ.end(), zero.begin(), zero.end());
    out.push_back(make_slater(es, occ));
  } else {
    auto occ = base;
    occ.insert(occ.end(), zero.begin(), zero.end());
    out.push_back(make_slater(es, occ));
    out.push_back(make_slater(es, base));
  }
  return out;
}

// G^bo(i, j) = sum_{nu in occ} <L_nu|e_i><e_j|R_nu>
inline cplx corr_bio(const SlaterState& st, Eigen::Index i, Eigen::Index j) {
  const auto& es = *st.es;
  require(i >= 0 && j >= 0 && i < es.dim() && j < es.dim(), ErrorKind::InvalidArgument,
          "site index out of range");
  cplx s = 0;
  for (int nu : st.occupied) s += std::conj(es.L(i, nu)) * es.R(j, nu);
  return s;
}

// Normalized <psi|c_i^dag c_j|psi> / <psi|psi> for a Slater state of right eigenvectors:
// G(i, j) = [R_occ (R_occ^dag R_occ)^-1 R_occ^dag]_{j, i}. The overlap matrix is factorized
// once; each entry then costs one triangular solve.
class HermitianCorrelator {
 public:
  explicit HermitianCorrelator(const SlaterState& st) {
    const auto& es = *st.es;
    const auto M = static_cast<Eigen::Index>(st.M());
    Rocc_.resize(es.dim(), M);
    for (Eigen::Index a = 0; a < M; ++a) Rocc_.col(a) = es.R.col(st.occupied[a]);
    if (M == 0) return;
    lu_.setThreshold(1e-12);
    lu_.compute(Rocc_.adjoint() * Rocc_);
    require(lu_.isInvertible(), ErrorKind::SingularOverlap,
            "Slater state has vanishing norm (singular R^dag R on occupied states)");
  }

  // X_i = S^-1 R_occ^dag e_i
  Vec column(Eigen::Index i) const {
    require(i >= 0 && i < Rocc_.rows(), ErrorKind::InvalidArgument, "site index out of range");
    return lu_.solve(Vec(Rocc_.row(i).adjoint()));
  }

  cplx operator()(Eigen::Index i, Eigen::Index j) const {
    if (Rocc_.cols() == 0) return 0.0;
    require(j >= 0 && j < Rocc_.rows(), ErrorKind::InvalidArgument, "site index out of range");
    return Rocc_.row(j) * column(i);
  }

  // Full matrix with entry (i, j) = G(i, j).
  Mat matrix() const {
    if (Rocc_.cols() == 0) return Mat::Zero(Rocc_.rows(), Rocc_.rows());
    const Mat X = lu_.solve(Mat(Rocc_.adjoint()));
    return (Rocc_ * X).transpose();
  }

 private:
  Mat Rocc_;
  Eigen::FullPivLU<Mat> lu_;
};

inline cplx corr_hermitian(const SlaterState& st, Eigen::Index i, Eigen::Index j) {
  return HermitianCorrelator(st)(i, j);
}

inline Mat corr_bio_matrix(const SlaterState& st) {
  const auto& es = *st.es;
  Mat G = Mat::Zero(es.dim(), es.dim());
  for (int nu : st.occupied) G += es.L.col(nu).conjugate() * es.R.col(nu).transpose();
  return G;
}

// ---------------------------------------------------------------- Fock-space oracle

struct FockCorrelation {
  cplx hermitian;
  cplx biorthogonal;
};

namespace detail {

inline int popcount_below(unsigned mask, int site) {
  return __builtin_popcount(mask & ((1u << site) - 1u));
}

// Amplitudes of prod_b c^dag_{V, occ_b} |0> on basis states c^dag_{j_1} ... c^dag_{j_M}|0>
// (j_1 < ... < j_M), i.e. det V[{j}, occ].
inline Vec slater_amplitudes(const Mat& V, const std::vector<int>& occ,
                             const std::vector<unsigned>& basis) {
  const auto M = static_cast<Eigen::Index>(occ.size());
  Vec amp(static_cast<Eigen::Index>(basis.size()));
  Mat sub(M, M);
  for (std::size_t b = 0; b < basis.size(); ++b) {
    Eigen::Index r = 0;
    for (int site = 0; site < V.rows(); ++site) {
      if (!(basis[b] >> site & 1u)) continue;
      for (Eigen::Index a = 0; a < M; ++a) sub(r, a) = V(site, occ[a]);
      ++r;
    }
    amp(static_cast<Eigen::Index>(b)) = M == 0 ? cplx(1.0) : sub.determinant();
  }
  return amp;
}

}  // namespace detail

// Brute-force check of both correlators in the full M-particle Fock sector.
inline FockCorrelation fock_oracle(const Mat& H, const std::vector<int>& occupied, Eigen::Index i,
                                   Eigen::Index j) {
  require_square_finite(H, "H");
  const int n = static_cast<int>(H.rows());
  require(n <= 14, ErrorKind::DimensionTooLarge, "Fock oracle limited to n <= 14");
  require(i >= 0 && j >= 0 && i < n && j < n, ErrorKind::InvalidArgument, "site index out of range");
  const auto es = biortho_decompose(H);
  std::vector<int> occ = occupied;
  std::sort(occ.begin(), occ.end());
  const int M = static_cast<int>(occ.size());
  for (int v : occ) require(v >= 0 && v < n, ErrorKind::InvalidArgument, "occupied index out of range");

  std::vector<unsigned> basis;
  std::vector<int> index(1u << n, -1);
  for (unsigned m = 0; m < (1u << n); ++m)
    if (__builtin_popcount(m) == M) {
      index[m] = static_cast<int>(basis.size());
      basis.push_back(m);
    }
  const Vec psiR = detail::slater_amplitudes(es.R, occ, basis);
  const Vec psiL = detail::slater_amplitudes(es.L, occ, basis);

  // phi = c_i^dag c_j psiR
  Vec phi = Vec::Zero(psiR.size());
  const int si = static_cast<int>(i), sj = static_cast<int>(j);
  for (std::size_t b = 0; b < basis.size(); ++b) {
    unsigned m = basis[b];
    if (!(m >> sj & 1u)) continue;
    int sign = (detail::popcount_below(m, sj) % 2) ? -1 : 1;
    m &= ~(1u << sj);
    if (m >> si & 1u) continue;
    sign *= (detail::popcount_below(m, si) % 2) ? -1 : 1;
    m |= 1u << si;
    phi(index[m]) += static_cast<double>(sign) * psiR(static_cast<Eigen::Index>(b));
  }
  const cplx nR = psiR.squaredNorm();
  const cplx nLR = psiL.dot(psiR);
  require(std::abs(nR) > 1e-300, ErrorKind::SingularOverlap, "Slater state has zero norm");
  require(std::abs(nLR) > 1e-300, ErrorKind::SingularOverlap, "left/right Slater overlap vanishes");
  return {psiR.dot(phi) / nR, psiL.dot(phi) / nLR};
}

inline FockCorrelation fock_oracle(const Mat& H, const OccupationPolicy& policy, Eigen::Index i,
                                   Eigen::Index j) {
  auto es = std::make_shared<const BiorthoEigensystem>(biortho_decompose(H));
  const auto states = ground_state(es, policy);
  FockCorrelation acc{0.0, 0.0};
  for (const auto& s : states) {
    const auto r = fock_oracle(H, s.occupied, i, j);
    acc.hermitian += r.hermitian / static_cast<double>(states.size());
    acc.biorthogonal += r.biorthogonal / static_cast<double>(states.size());
  }
  return acc;
}

// ---------------------------------------------------------------- RLM dot occupancy

struct DotOccupancyRow {
  double phi = 0;
  SpectralClass spectral_class = SpectralClass::AllReal;
  int states = 1;  // number of Slater states averaged
  double hermitian = 0;
  double biorthogonal = 0;
  double biorthogonal_imag = 0;
};

// One decomposition, several occupation policies.
inline std::vector<DotOccupancyRow> dot_occupancy_policies(const RLMParams& p,
                                                           const std::vector<OccupationPolicy>& policies) {
  const Mat H = rlm_hamiltonian(p);
  auto es = std::make_shared<const BiorthoEigensystem>(biortho_decompose(H));
  const auto cls = classify_spectrum(*es);
  const Eigen::Index d = p.dot();
  std::vector<DotOccupancyRow> rows;
  for (const auto& policy : policies) {
    DotOccupancyRow row;
    row.spectral_class = cls;
    const auto states = ground_state(es, policy);
    row.states = static_cast<int>(states.size());
    cplx herm = 0, bio = 0;
    for (const auto& s : states) {
      herm += HermitianCorrelator(s)(d, d);
      bio += corr_bio(s, d, d);
    }
    herm /= static_cast<double>(states.size());
    bio /= static_cast<double>(states.size());
    row.hermitian = herm.real();
    row.biorthogonal = bio.real();
    row.biorthogonal_imag = bio.imag();
    rows.push_back(row);
  }
  return rows;
}

inline DotOccupancyRow dot_occupancy_point(const RLMParams& p, const OccupationPolicy& policy) {
  return dot_occupancy_policies(p, {policy}).front();
}

// gamma = |gamma| e^{i phi} for each phi of the grid; |gamma| taken from the template.
inline std::vector<DotOccupancyRow> dot_occupancy_scan(const RLMParams& tmpl,
                                                       const std::vector<double>& phi_grid,
                                                       const OccupationPolicy& policy,
                                                       unsigned threads = 1) {
  std::vector<DotOccupancyRow> rows(phi_grid.size());
  const double mag = std::abs(tmpl.gamma);
  parallel_for(phi_grid.size(), threads, [&](std::size_t k) {
    RLMParams p = tmpl;
    p.gamma = std::polar(mag, phi_grid[k]);
    rows[k] = dot_occupancy_point(p, policy);
    rows[k].phi = phi_grid[k];
  });
  return rows;
}

}  // namespace nhqm
