#pragma once

#include <complex>
#ifndef lapack_complex_float
#define lapack_complex_float std::complex<float>
#endif
#ifndef lapack_complex_double
#define lapack_complex_double std::complex<double>
#endif
#include <lapacke.h>

#include "common.hpp"

namespace nhqm::lapack {

struct RightEigen {
  Vec values;
  Mat vectors;  // unit Euclidean-norm columns
};

// Right eigenpairs of a general complex matrix (zgeev).
inline RightEigen geev_right(const Mat& H) {
  const lapack_int n = static_cast<lapack_int>(H.rows());
  Mat A = H;
  RightEigen out{Vec(n), Mat(n, n)};
  lapack_int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'V', n, A.data(), n, out.values.data(),
                                  nullptr, 1, out.vectors.data(), n);
  require(info == 0, ErrorKind::NotDiagonalizable,
          "zgeev failed with info=" + std::to_string(static_cast<long>(info)));
  return out;
}

inline Vec geev_values(const Mat& H) {
  const lapack_int n = static_cast<lapack_int>(H.rows());
  Mat A = H;
  Vec w(n);
  lapack_int info =
      LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'N', n, A.data(), n, w.data(), nullptr, 1, nullptr, 1);
  require(info == 0, ErrorKind::NotDiagonalizable,
          "zgeev failed with info=" + std::to_string(static_cast<long>(info)));
  return w;
}

}  // namespace nhqm::lapack
