#pragma once

#include <gtest/gtest.h>

#include "nhqm/nhqm.hpp"

namespace nhqm::test {

inline TwoLevelParams two_level(double z, double phi = 0.0) { return {z, 1.0, pi / 2, phi}; }

inline Vec up() {
  Vec v(2);
  v << 1.0, 0.0;
  return v;
}

inline Mat diag_real(std::initializer_list<double> d) {
  Mat A = Mat::Zero(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(d.size()));
  Eigen::Index i = 0;
  for (double x : d) A(i, i) = x, ++i;
  return A;
}

inline Eigen::Index nearest(const Vec& E, cplx e) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < E.size(); ++i)
    if (std::abs(E(i) - e) < std::abs(E(best) - e)) best = i;
  return best;
}

inline std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = n == 1 ? a : a + (b - a) * i / (n - 1);
  return v;
}

#define EXPECT_THROW_KIND(stmt, k)                                   \
  do {                                                               \
    try {                                                            \
      stmt;                                                          \
      ADD_FAILURE() << "expected " << ::nhqm::to_string(k);          \
    } catch (const ::nhqm::Error& e) {                               \
      EXPECT_EQ(e.kind(), k) << e.what();                            \
    }                                                                \
  } while (0)

}  // namespace nhqm::test
