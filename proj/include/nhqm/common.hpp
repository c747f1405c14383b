#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace nhqm {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline constexpr cplx I{0.0, 1.0};
inline constexpr double pi = 3.14159265358979323846;

enum class ErrorKind {
  InvalidArgument,
  DimensionMismatch,
  NotDiagonalizable,
  SpectrumNotReal,
  UnpairedComplexEigenvalue,
  SingularMetric,
  NotPositiveDefinite,
  ZeroNormState,
  ZeroPartitionFunction,
  NonStationaryInitialDensity,
  NonHermitianPerturbation,
  StepSizeNotConverged,
  GSquareNotPSD,
  ZeroProjection,
  ExceptionalPoint,
  RootCountMismatch,
  FillingUnreachable,
  SingularOverlap,
  DimensionTooLarge,
  ConfigInvalid,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NotDiagonalizable: return "NotDiagonalizable";
    case ErrorKind::SpectrumNotReal: return "SpectrumNotReal";
    case ErrorKind::UnpairedComplexEigenvalue: return "UnpairedComplexEigenvalue";
    case ErrorKind::SingularMetric: return "SingularMetric";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::ZeroNormState: return "ZeroNormState";
    case ErrorKind::ZeroPartitionFunction: return "ZeroPartitionFunction";
    case ErrorKind::NonStationaryInitialDensity: return "NonStationaryInitialDensity";
    case ErrorKind::NonHermitianPerturbation: return "NonHermitianPerturbation";
    case ErrorKind::StepSizeNotConverged: return "StepSizeNotConverged";
    case ErrorKind::GSquareNotPSD: return "GSquareNotPSD";
    case ErrorKind::ZeroProjection: return "ZeroProjection";
    case ErrorKind::ExceptionalPoint: return "ExceptionalPoint";
    case ErrorKind::RootCountMismatch: return "RootCountMismatch";
    case ErrorKind::FillingUnreachable: return "FillingUnreachable";
    case ErrorKind::SingularOverlap: return "SingularOverlap";
    case ErrorKind::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
  }
  return "Unknown";
}

// Exit-code class used by the CLI: 1 config, 2 domain precondition, 3 numerical failure.
inline int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::ConfigInvalid:
      return 1;
    case ErrorKind::InvalidArgument:
    case ErrorKind::DimensionMismatch:
    case ErrorKind::SpectrumNotReal:
    case ErrorKind::UnpairedComplexEigenvalue:
    case ErrorKind::NotPositiveDefinite:
    case ErrorKind::NonStationaryInitialDensity:
    case ErrorKind::NonHermitianPerturbation:
    case ErrorKind::GSquareNotPSD:
    case ErrorKind::ExceptionalPoint:
    case ErrorKind::FillingUnreachable:
    case ErrorKind::DimensionTooLarge:
      return 2;
    default:
      return 3;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) throw Error(kind, what);
}

inline void require_square_finite(const Mat& H, const char* name = "matrix") {
  require(H.rows() == H.cols() && H.rows() > 0, ErrorKind::DimensionMismatch,
          std::string(name) + " must be square and non-empty");
  require(H.allFinite(), ErrorKind::InvalidArgument, std::string(name) + " has non-finite entries");
}

inline double frob(const Mat& A) { return A.norm(); }

inline double hermiticity_residual(const Mat& A) { return (A - A.adjoint()).norm(); }

inline Mat identity(Eigen::Index n) { return Mat::Identity(n, n); }

inline Mat kron(const Mat& A, const Mat& B) {
  Mat K(A.rows() * B.rows(), A.cols() * B.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j)
      K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return K;
}

inline Mat pauli_x() { Mat s(2, 2); s << 0, 1, 1, 0; return s; }
inline Mat pauli_y() { Mat s(2, 2); s << 0, -I, I, 0; return s; }
inline Mat pauli_z() { Mat s(2, 2); s << 1, 0, 0, -1; return s; }

// Hermitian part taken explicitly before a self-adjoint solve, so round-off in the
// lower triangle cannot leak into the spectrum.
inline Mat hermitize(const Mat& A) { return 0.5 * (A + A.adjoint()); }

// Function of a Hermitian matrix through its eigendecomposition.
template <class F>
Mat hermitian_function(const Mat& A, F&& f) {
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(A));
  Eigen::VectorXd w = es.eigenvalues();
  Vec fw(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) fw(i) = f(w(i));
  return es.eigenvectors() * fw.asDiagonal() * es.eigenvectors().adjoint();
}

inline Eigen::VectorXd hermitian_eigenvalues(const Mat& A) {
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(A), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

// FNV-1a over the raw bytes of a sequence of doubles.
inline std::uint64_t fnv1a(const double* p, std::size_t n, std::uint64_t h = 1469598103934665603ULL) {
  const auto* b = reinterpret_cast<const unsigned char*>(p);
  for (std::size_t i = 0; i < n * sizeof(double); ++i) {
    h ^= b[i];
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace nhqm
