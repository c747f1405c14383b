#pragma once

#include <random>

#include "biortho.hpp"

namespace nhqm {

inline Mat random_complex(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Mat A(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) A(i, j) = cplx(nd(rng), nd(rng));
  return A;
}

inline Vec random_state(Eigen::Index n, std::mt19937_64& rng) {
  Vec v = random_complex(n, 1, rng).col(0);
  return v.normalized();
}

// Quasi-Hermitian matrix S h S^-1 with h Hermitian and S = 1 + strength * X, X random.
// Its spectrum is real by construction; instances with nearly degenerate levels or a badly
// conditioned S are redrawn so that every accepted instance is safely diagonalizable.
inline Mat random_unbroken(Eigen::Index n, std::mt19937_64& rng, double strength = 0.3) {
  for (;;) {
    const Mat X = random_complex(n, n, rng);
    const Mat h = 0.5 * (X + X.adjoint()) / std::sqrt(static_cast<double>(n));
    const Mat S = identity(n) + strength * random_complex(n, n, rng) / std::sqrt(static_cast<double>(n));
    Eigen::JacobiSVD<Mat> svd(S);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) < 0.2 * sv(0)) continue;
    const Eigen::VectorXd w = hermitian_eigenvalues(h);
    double gap = 1e300;
    for (Eigen::Index i = 1; i < w.size(); ++i) gap = std::min(gap, w(i) - w(i - 1));
    if (n > 1 && gap < 1e-3) continue;
    return S * h * S.inverse();
  }
}

}  // namespace nhqm
