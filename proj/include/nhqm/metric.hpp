#pragma once

#include "biortho.hpp"

namespace nhqm {

enum class MetricKind { EtaR, EtaCp, Generic };

struct MetricOperator {
  Mat matrix;
  MetricKind kind = MetricKind::Generic;
  bool positive_definite = false;
  std::uint64_t source_hash = 0;
};

inline std::uint64_t eigensystem_hash(const BiorthoEigensystem& es) {
  std::uint64_t h = fnv1a(reinterpret_cast<const double*>(es.E.data()), 2 * es.E.size());
  h = fnv1a(reinterpret_cast<const double*>(es.R.data()), 2 * es.R.size(), h);
  return fnv1a(reinterpret_cast<const double*>(es.L.data()), 2 * es.L.size(), h);
}

inline bool is_positive_definite(const Mat& eta) {
  const double nrm = eta.norm();
  if (nrm == 0) return false;
  return hermitian_eigenvalues(eta).minCoeff() > 1e-12 * nrm;
}

inline MetricOperator make_metric(Mat m, MetricKind kind = MetricKind::Generic,
                                  std::uint64_t source_hash = 0) {
  require_square_finite(m, "metric");
  require(hermiticity_residual(m) <= 1e-10 * std::max(1.0, m.norm()), ErrorKind::InvalidArgument,
          "metric must be Hermitian");
  MetricOperator op{hermitize(m), kind, false, source_hash};
  op.positive_definite = is_positive_definite(op.matrix);
  return op;
}

inline MetricOperator build_eta_r(const BiorthoEigensystem& es) {
  for (Eigen::Index i = 0; i < es.dim(); ++i)
    require(es.is_real(i), ErrorKind::SpectrumNotReal, "eta_r needs an entirely real spectrum");
  Mat eta = es.L * es.L.adjoint();
  MetricOperator op{hermitize(eta), MetricKind::EtaR, true, eigensystem_hash(es)};
  op.positive_definite = is_positive_definite(op.matrix);
  return op;
}

// Inverse of eta_r assembled from right vectors.
inline Mat eta_r_inverse(const BiorthoEigensystem& es) {
  return hermitize(es.R * es.R.adjoint());
}

inline MetricOperator build_eta_cp(const BiorthoEigensystem& es) {
  Mat eta = Mat::Zero(es.dim(), es.dim());
  bool has_pair = false;
  for (Eigen::Index i = 0; i < es.dim(); ++i) {
    switch (es.tag[i]) {
      case EigTag::Real:
        eta += es.L.col(i) * es.L.col(i).adjoint();
        break;
      case EigTag::Unpaired:
        throw Error(ErrorKind::UnpairedComplexEigenvalue,
                    "complex eigenvalue without conjugate partner");
      case EigTag::PairMember:
        if (es.E(i).imag() > 0) {  // upper member is the unstarred one
          const auto j = es.partner[i];
          Mat t = es.L.col(i) * es.L.col(j).adjoint();
          eta += t + t.adjoint();
          has_pair = true;
        }
        break;
    }
  }
  require(has_pair, ErrorKind::InvalidArgument, "eta_cp needs at least one conjugate pair");
  MetricOperator op{hermitize(eta), MetricKind::EtaCp, false, eigensystem_hash(es)};
  op.positive_definite = is_positive_definite(op.matrix);
  return op;
}

inline Mat solve_inverse(const Mat& A, const char* what) {
  Eigen::PartialPivLU<Mat> lu(A);
  // The rcond estimator reports 1 for an exactly zero pivot, so check the pivots as well.
  const Eigen::VectorXd piv = lu.matrixLU().diagonal().cwiseAbs();
  require(piv.minCoeff() > 1e-14 * piv.maxCoeff() && lu.rcond() > 1e-14, ErrorKind::SingularMetric,
          std::string(what) + " is singular");
  return lu.solve(identity(A.rows()));
}

inline double is_pseudo_hermitian(const Mat& H, const MetricOperator& eta) {
  require_square_finite(H, "H");
  require(eta.matrix.rows() == H.rows(), ErrorKind::DimensionMismatch, "metric/H size mismatch");
  const Mat inv = solve_inverse(eta.matrix, "metric");
  return (eta.matrix * H * inv - H.adjoint()).norm() / std::max(H.norm(), 1e-300);
}

inline MetricOperator eta_sqrt(const MetricOperator& eta) {
  require(eta.positive_definite, ErrorKind::NotPositiveDefinite,
          "square root needs a positive definite metric");
  Mat s = hermitian_function(eta.matrix, [](double x) { return cplx(std::sqrt(x)); });
  MetricOperator op{s, MetricKind::Generic, true, eta.source_hash};
  return op;
}

inline Mat eta_inv_sqrt(const MetricOperator& eta) {
  require(eta.positive_definite, ErrorKind::NotPositiveDefinite,
          "square root needs a positive definite metric");
  return hermitian_function(eta.matrix, [](double x) { return cplx(1.0 / std::sqrt(x)); });
}

inline Mat hermitian_equivalent(const Mat& H, const MetricOperator& eta_r) {
  const Mat s = eta_sqrt(eta_r).matrix;
  const Mat si = eta_inv_sqrt(eta_r);
  return s * H * si;
}

inline double pt_observable_check(const Mat& O, const MetricOperator& eta) {
  return (eta.matrix * O - O.adjoint() * eta.matrix).norm() / std::max(1.0, O.norm());
}

// Maps a Hermitian operator to its eta_r-pseudo-Hermitian partner.
inline Mat pt_observable_from_hermitian(const Mat& O_herm, const MetricOperator& eta_r) {
  return eta_inv_sqrt(eta_r) * O_herm * eta_sqrt(eta_r).matrix;
}

}  // namespace nhqm
