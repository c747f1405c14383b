#pragma once

#include <algorithm>
#include <cstdio>
#include <limits>
#include <numeric>
#include <vector>

#include "common.hpp"
#include "lapack.hpp"

namespace nhqm {

enum class EigTag { Real, PairMember, Unpaired };

struct BiorthoEigensystem {
  Vec E;  // sorted by (Re E, Im E)
  Mat R;  // columns |R_nu>
  Mat L;  // columns |L_nu>, <L_nu|R_mu> = delta
  std::vector<EigTag> tag;
  std::vector<int> partner;  // conjugate partner index, -1 if none
  double tol = 1e-9;
  double scale = 1.0;
  double proximity = 1.0;  // min overlap of unit-norm left/right vectors

  Eigen::Index dim() const { return E.size(); }
  bool is_real(Eigen::Index nu) const { return tag[nu] == EigTag::Real; }
};

enum class SpectralClass { AllReal, ConjugatePairs, Mixed, NotPseudoHermitian };

inline const char* to_string(SpectralClass c) {
  switch (c) {
    case SpectralClass::AllReal: return "AllReal";
    case SpectralClass::ConjugatePairs: return "ConjugatePairs";
    case SpectralClass::Mixed: return "Mixed";
    case SpectralClass::NotPseudoHermitian: return "NotPseudoHermitian";
  }
  return "?";
}

namespace detail {

inline constexpr double degeneracy_rel = 1e-8;

inline double spectral_scale(const Vec& E) {
  double s = 1.0;
  for (Eigen::Index i = 0; i < E.size(); ++i) s = std::max(s, std::abs(E(i)));
  return s;
}

struct Tags {
  std::vector<EigTag> tag;
  std::vector<int> partner;
};

inline Tags conjugate_tags(const Vec& E, double tol, double scale) {
  const auto n = E.size();
  Tags t{std::vector<EigTag>(n, EigTag::Unpaired), std::vector<int>(n, -1)};
  const double thr = tol * scale;
  for (Eigen::Index i = 0; i < n; ++i)
    if (std::abs(E(i).imag()) < thr) t.tag[i] = EigTag::Real;
  // Upper members (Im E > 0) claim the nearest free lower member.
  for (Eigen::Index i = 0; i < n; ++i) {
    if (t.tag[i] == EigTag::Real || E(i).imag() < 0 || t.partner[i] >= 0) continue;
    int best = -1;
    double bd = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i || t.tag[j] == EigTag::Real || t.partner[j] >= 0 || E(j).imag() > 0) continue;
      double d = std::abs(E(j) - std::conj(E(i)));
      if (d < bd) { bd = d; best = static_cast<int>(j); }
    }
    if (best >= 0 && bd < thr) {
      t.partner[i] = best;
      t.partner[best] = static_cast<int>(i);
      t.tag[i] = t.tag[best] = EigTag::PairMember;
    }
  }
  return t;
}

// Members of a conjugate pair share the mean of their real parts as sort key, so rounding
// noise in Re E cannot flip the order of E and E*.
inline std::vector<int> sorted_order(const Vec& E, const Mat& R, double tol) {
  const auto tags = conjugate_tags(E, tol, spectral_scale(E));
  std::vector<double> re(E.size());
  for (Eigen::Index i = 0; i < E.size(); ++i) {
    const int p = tags.partner[i];
    re[i] = p >= 0 ? 0.5 * (E(i).real() + E(p).real()) : E(i).real();
  }
  std::vector<int> idx(E.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (re[a] != re[b]) return re[a] < re[b];
    if (E(a).imag() != E(b).imag()) return E(a).imag() < E(b).imag();
    return std::abs(R(0, a)) > std::abs(R(0, b));
  });
  return idx;
}

// Groups of indices whose eigenvalues are connected by |dE| < thr.
inline std::vector<std::vector<int>> clusters(const Vec& E, double thr) {
  const int n = static_cast<int>(E.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  // Sorting by real part lets the inner loop stop early.
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n && E(b).real() - E(a).real() < thr; ++b)
      if (std::abs(E(a) - E(b)) < thr) parent[find(a)] = find(b);
  std::vector<std::vector<int>> groups;
  std::vector<int> slot(n, -1);
  for (int a = 0; a < n; ++a) {
    int r = find(a);
    if (slot[r] < 0) { slot[r] = static_cast<int>(groups.size()); groups.emplace_back(); }
    groups[slot[r]].push_back(a);
  }
  return groups;
}

inline double min_singular_value(const Mat& M) {
  if (M.rows() == 1) return std::abs(M(0, 0));
  Eigen::JacobiSVD<Mat> svd(M);
  return svd.singularValues().minCoeff();
}

inline void phase_fix(Eigen::Ref<Vec> r) {
  Eigen::Index k;
  r.cwiseAbs().maxCoeff(&k);
  const cplx a = r(k);
  if (std::abs(a) > 0) r *= std::conj(a) / std::abs(a);
}

// Modified Gram-Schmidt orthonormalization of the columns of A in place.
inline void mgs_orthonormalize(Mat& A) {
  for (Eigen::Index j = 0; j < A.cols(); ++j) {
    for (Eigen::Index i = 0; i < j; ++i) A.col(j) -= A.col(i).dot(A.col(j)) * A.col(i);
    A.col(j).normalize();
  }
}

// Left vectors biorthonormal to the fixed right vectors Rc, taken from span(Lc).
// Forward pivoted sweep makes L'^dag R unit upper triangular, backward sweep clears it.
inline Mat biorthonormalize_cluster(const Mat& Rc, Mat Lc) {
  const Eigen::Index k = Rc.cols();
  std::vector<bool> used(k, false);
  Mat out(Rc.rows(), k);
  for (Eigen::Index nu = 0; nu < k; ++nu) {
    Eigen::Index best = -1;
    double bv = -1.0;
    for (Eigen::Index c = 0; c < k; ++c) {
      if (used[c]) continue;
      double v = std::abs(Lc.col(c).dot(Rc.col(nu))) / Lc.col(c).norm();
      if (v > bv) { bv = v; best = c; }
    }
    used[best] = true;
    const cplx p = Lc.col(best).dot(Rc.col(nu));
    out.col(nu) = Lc.col(best) / std::conj(p);
    for (Eigen::Index c = 0; c < k; ++c) {
      if (used[c]) continue;
      const cplx q = Lc.col(c).dot(Rc.col(nu));
      Lc.col(c) -= std::conj(q) * out.col(nu);
    }
  }
  for (Eigen::Index nu = k - 1; nu >= 0; --nu)
    for (Eigen::Index mu = nu + 1; mu < k; ++mu) {
      const cplx q = out.col(nu).dot(Rc.col(mu));
      out.col(nu) -= std::conj(q) * out.col(mu);
    }
  return out;
}

// Eigenvectors of nearly (but not numerically) degenerate levels come out of the two
// independent eigensolves with errors of order eps*|H|/gap that mix within the pair, which
// spoils <L_nu|R_mu> = 0 at the 1e-9 level for level spacings around 1e-6. Levels whose
// measured cross overlap exceeds the threshold are grouped, and within each group the left
// vectors are replaced by the exact dual basis of the right vectors. Returns false when a
// group's overlap block is numerically singular, i.e. the vectors coalesce.
inline bool refine_near_degenerate(BiorthoEigensystem& es, double thr = 1e-13) {
  const int n = static_cast<int>(es.dim());
  const Mat O = es.L.adjoint() * es.R;
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  bool any = false;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      if (a != b && std::abs(O(a, b)) > thr) {
        parent[find(a)] = find(b);
        any = true;
      }
  if (!any) return true;
  bool ok = true;
  std::vector<std::vector<int>> groups(n);
  for (int a = 0; a < n; ++a) groups[find(a)].push_back(a);
  for (const auto& g : groups) {
    if (g.size() < 2) continue;
    const auto k = static_cast<Eigen::Index>(g.size());
    Mat Og(k, k), Lg(es.dim(), k);
    for (Eigen::Index a = 0; a < k; ++a) {
      Lg.col(a) = es.L.col(g[a]);
      for (Eigen::Index b = 0; b < k; ++b) Og(a, b) = O(g[a], g[b]);
    }
    Eigen::PartialPivLU<Mat> lu(Og);
    if (!(lu.rcond() > 1e-10)) {
      ok = false;  // coalescing vectors are left alone
      continue;
    }
    const Mat X = lu.inverse().adjoint();
    Lg = Lg * X;
    for (Eigen::Index a = 0; a < k; ++a) {
      const double s = std::sqrt(Lg.col(a).norm() / es.R.col(g[a]).norm());
      es.R.col(g[a]) *= s;
      es.L.col(g[a]) = Lg.col(a) / s;
    }
  }
  return ok;
}

struct Decomposition {
  BiorthoEigensystem es;
  bool paired = true;
};

inline Decomposition decompose(const Mat& H, double tol, bool strict) {
  require_square_finite(H, "H");
  require(tol > 0, ErrorKind::InvalidArgument, "tol must be positive");
  const Eigen::Index n = H.rows();

  auto right = lapack::geev_right(H);
  auto left = lapack::geev_right(H.adjoint());

  const auto order = sorted_order(right.values, right.vectors, tol);
  Decomposition d;
  BiorthoEigensystem& es = d.es;
  es.tol = tol;
  es.E.resize(n);
  es.R.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    es.E(i) = right.values(order[i]);
    es.R.col(i) = right.vectors.col(order[i]);
  }
  es.scale = spectral_scale(es.E);

  // Greedy match of each right eigenvalue to the nearest unused conjugate left one.
  Mat Lraw(n, n);
  std::vector<bool> used(n, false);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index best = -1;
    double bd = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (used[j]) continue;
      double dd = std::abs(left.values(j) - std::conj(es.E(i)));
      if (dd < bd) { bd = dd; best = j; }
    }
    if (bd >= tol * es.scale) d.paired = false;
    used[best] = true;
    Lraw.col(i) = left.vectors.col(best);
  }
  if (strict && !d.paired)
    throw Error(ErrorKind::NotDiagonalizable,
                "left and right spectra do not pair within tol (exceptional point?)");

  es.L.resize(n, n);
  es.proximity = 1.0;
  for (const auto& cl : clusters(es.E, degeneracy_rel * es.scale)) {
    const auto k = static_cast<Eigen::Index>(cl.size());
    Mat Rc(n, k), Lc(n, k);
    for (Eigen::Index a = 0; a < k; ++a) {
      Rc.col(a) = es.R.col(cl[a]).normalized();
      Lc.col(a) = Lraw.col(cl[a]).normalized();
    }
    const double prox = min_singular_value(Lc.adjoint() * Rc);
    es.proximity = std::min(es.proximity, prox);
    if (strict && prox < tol)
      throw Error(ErrorKind::NotDiagonalizable,
                  "left/right eigenvector overlap " + std::to_string(prox) + " below tol");
    if (k > 1) mgs_orthonormalize(Rc);
    for (Eigen::Index a = 0; a < k; ++a) phase_fix(Rc.col(a));
    Mat Lb = (k == 1) ? Mat(Lc / std::conj(Lc.col(0).dot(Rc.col(0)))) : biorthonormalize_cluster(Rc, Lc);
    for (Eigen::Index a = 0; a < k; ++a) {
      // Balanced normalization: |R_nu| = |L_nu|.
      const double s = std::sqrt(Lb.col(a).norm() / Rc.col(a).norm());
      es.R.col(cl[a]) = Rc.col(a) * s;
      es.L.col(cl[a]) = Lb.col(a) / s;
    }
  }

  const bool separable = refine_near_degenerate(es);
  if (strict) {
    require(separable, ErrorKind::NotDiagonalizable, "eigenvectors coalesce (exceptional point)");
    // At an exact exceptional point the eigensolver splits the coalesced level by ~sqrt(eps),
    // so the overlap test can pass while completeness is lost to round-off amplified by the
    // eigenvector condition number (~eps / proximity^2). Checked only when that is plausible.
    if (es.proximity < 1e-4) {
      const double res = (es.R * es.L.adjoint() - identity(n)).norm();
      if (!(res <= tol * std::sqrt(static_cast<double>(n)))) {
        char msg[96];
        std::snprintf(msg, sizeof msg, "completeness residual %.3e near an exceptional point", res);
        throw Error(ErrorKind::NotDiagonalizable, msg);
      }
    }
  }

  auto t = conjugate_tags(es.E, tol, es.scale);
  es.tag = std::move(t.tag);
  es.partner = std::move(t.partner);
  return d;
}

}  // namespace detail

inline BiorthoEigensystem biortho_decompose(const Mat& H, double tol = 1e-9) {
  return detail::decompose(H, tol, true).es;
}

inline double verify_completeness(const BiorthoEigensystem& es) {
  return (es.R * es.L.adjoint() - identity(es.dim())).norm();
}

inline double biorthonormality_residual(const BiorthoEigensystem& es) {
  return (es.L.adjoint() * es.R - identity(es.dim())).norm();
}

inline Mat spectral_reconstruction(const BiorthoEigensystem& es) {
  return es.R * es.E.asDiagonal() * es.L.adjoint();
}

inline double spectral_residual(const BiorthoEigensystem& es, const Mat& H) {
  return (spectral_reconstruction(es) - H).norm() / std::max(H.norm(), 1e-300);
}

inline SpectralClass classify_spectrum(const BiorthoEigensystem& es, double tol) {
  auto t = detail::conjugate_tags(es.E, tol, es.scale);
  bool any_real = false, any_pair = false;
  for (auto g : t.tag) {
    if (g == EigTag::Unpaired) return SpectralClass::NotPseudoHermitian;
    (g == EigTag::Real ? any_real : any_pair) = true;
  }
  if (!any_pair) return SpectralClass::AllReal;
  return any_real ? SpectralClass::Mixed : SpectralClass::ConjugatePairs;
}

inline SpectralClass classify_spectrum(const BiorthoEigensystem& es) {
  return classify_spectrum(es, es.tol);
}

// min over eigenvalue clusters of the smallest singular value of the overlap matrix of
// unit-norm left and right eigenvectors; a single eigenvalue gives |<L^|R^>|.
inline double exceptional_proximity(const Mat& H) {
  return detail::decompose(H, 1e-9, false).es.proximity;
}

}  // namespace nhqm
