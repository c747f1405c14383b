#pragma once

#include <limits>
#include <vector>

#include "models.hpp"
#include "parallel.hpp"

// Half-filled ground state of the staggered ring solved block by block in momentum space.
// Each block (|k>, |k+pi>) contributes exactly one occupied level, the one at E = -s(k), so
// R^dag R restricted to occupied states is diagonal and the Hermitian correlator needs no
// matrix inverse. This is what makes N ~ 10^4 .. 10^6 scans cheap.
namespace nhqm {

struct OccupiedBlock {
  double k;
  cplx x, y;    // right vector  x|k> + y|k+pi>
  cplx lx, ly;  // left row      lx<k| + ly<k+pi|, normalized so lx x + ly y = 1
  double norm2; // |x|^2 + |y|^2
};

// Requires a real band gap (g > delta). c = g - delta sin k is evaluated as
// delta_s + delta cos^2 k / (1 + sin k) to keep precision at tiny delta_s.
inline std::vector<OccupiedBlock> chain_occupied_blocks(const ChainParams& p) {
  validate(p);
  require(p.g > p.delta || p.delta_s > 0, ErrorKind::InvalidArgument,
          "momentum route needs g > delta (set delta_s > 0)");
  if (p.delta_s > 0)
    require(std::abs(p.g - p.delta - p.delta_s) <= 1e-12 * std::max(1.0, p.g),
            ErrorKind::InvalidArgument, "chain parameters must satisfy delta = g - delta_s");
  const double ds = p.delta_s > 0 ? p.delta_s : p.g - p.delta;
  std::vector<OccupiedBlock> out;
  out.reserve(p.N / 2);
  for (double k : chain_block_momenta(p)) {
    const double sk = std::sin(k), ck = std::cos(k);
    const double a = p.J * ck;
    const double b = p.g + p.delta * sk;
    const double one_minus_sin = sk >= 0 ? ck * ck / (1.0 + sk) : 1.0 - sk;
    const double c = ds + p.delta * one_minus_sin;
    const double s = std::sqrt(a * a + b * c);
    OccupiedBlock o{k, 0, 0, 0, 0, 0};
    // Avoid the cancellation in s + a when a < 0, using (s + a)(s - a) = b c.
    if (a >= 0) {
      o.x = b;  o.y = -(s + a);
      o.lx = c; o.ly = -(s + a);
    } else {
      o.x = 1.0;  o.y = -c / (s - a);
      o.lx = 1.0; o.ly = -b / (s - a);
    }
    const cplx ov = o.lx * o.x + o.ly * o.y;
    o.lx /= ov;
    o.ly /= ov;
    o.norm2 = std::norm(o.x) + std::norm(o.y);
    out.push_back(o);
  }
  return out;
}

struct ChainCorrelators {
  cplx herm;
  cplx bio;
};

// G_1(d) = <c^dag_{1+d} c_1> in both conventions; sites are 1-based.
inline ChainCorrelators chain_correlator(const std::vector<OccupiedBlock>& blocks, int N, long d) {
  const double par = (d % 2 == 0) ? 1.0 : -1.0;
  cplx h = 0, b = 0;
  for (const auto& o : blocks) {
    const cplx ph = std::exp(-I * o.k * static_cast<double>(d));
    const cplx r1 = o.x - o.y;  // R(1) up to e^{ik}/sqrt(N)
    h += r1 * std::conj(o.x - par * o.y) * ph / o.norm2;
    b += (o.lx - par * o.ly) * r1 * ph;
  }
  return {h / static_cast<double>(N), b / static_cast<double>(N)};
}

struct CriticalRow {
  int m = 0;
  double S = 0, F = 0;        // Hermitian |G(2m+1)|, |G(2m)|
  double S_pt = 0, F_pt = 0;  // biorthogonal analogues
  double dlog_S = 0, dlog_F = 0, dlog_S_pt = 0, dlog_F_pt = 0;  // centered, NaN at the ends
};

inline std::vector<CriticalRow> critical_green_scan(const ChainParams& p, int m_max,
                                                    unsigned threads = 1) {
  require(m_max >= 1, ErrorKind::InvalidArgument, "m_max must be >= 1");
  require(2L * m_max + 1 < p.N, ErrorKind::InvalidArgument, "m_max too large for the ring");
  const auto blocks = chain_occupied_blocks(p);
  std::vector<CriticalRow> rows(m_max);
  parallel_for(static_cast<std::size_t>(m_max), threads, [&](std::size_t idx) {
    const int m = static_cast<int>(idx) + 1;
    const auto odd = chain_correlator(blocks, p.N, 2L * m + 1);
    const auto even = chain_correlator(blocks, p.N, 2L * m);
    rows[idx] = CriticalRow{m, std::abs(odd.herm), std::abs(even.herm), std::abs(odd.bio),
                            std::abs(even.bio)};
  });
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto& r = rows[i];
    r.dlog_S = r.dlog_F = r.dlog_S_pt = r.dlog_F_pt = nan;
    if (i == 0 || i + 1 == rows.size()) continue;
    const auto& lo = rows[i - 1];
    const auto& hi = rows[i + 1];
    const double dl = std::log(static_cast<double>(hi.m)) - std::log(static_cast<double>(lo.m));
    auto der = [&](double a, double b) { return (std::log(b) - std::log(a)) / dl; };
    r.dlog_S = der(lo.S, hi.S);
    r.dlog_F = der(lo.F, hi.F);
    r.dlog_S_pt = der(lo.S_pt, hi.S_pt);
    r.dlog_F_pt = der(lo.F_pt, hi.F_pt);
  }
  return rows;
}

struct SlopeFit {
  int m_lo = 0, m_hi = 0, points = 0;
  double slope = std::numeric_limits<double>::quiet_NaN();
  double intercept = std::numeric_limits<double>::quiet_NaN();
};

// Least-squares slope of log(value) against log(m) over m_lo <= m <= m_hi.
template <class Get>
SlopeFit loglog_slope(const std::vector<CriticalRow>& rows, int m_lo, int m_hi, Get get) {
  SlopeFit f;
  f.m_lo = m_lo;
  f.m_hi = m_hi;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& r : rows) {
    if (r.m < m_lo || r.m > m_hi) continue;
    const double x = std::log(static_cast<double>(r.m)), y = std::log(get(r));
    sx += x; sy += y; sxx += x * x; sxy += x * y;
    ++f.points;
  }
  if (f.points < 2) return f;
  const double n = f.points;
  f.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  f.intercept = (sy - f.slope * sx) / n;
  return f;
}

// ---------------------------------------------------------------- convergence in N

// Geometric ladder of ring sizes, each rounded up to N = 2 mod 4 so that k = pi/2 is never
// on the momentum grid.
inline std::vector<int> geometric_sizes(int n_min, int n_max, double factor) {
  require(n_min >= 6 && n_max >= n_min && factor > 1, ErrorKind::InvalidArgument,
          "bad size ladder");
  std::vector<int> out;
  double x = n_min;
  while (x <= n_max) {
    int n = static_cast<int>(x);
    n += ((2 - n % 4) + 4) % 4;
    if (out.empty() || n != out.back()) out.push_back(n);
    x *= factor;
  }
  return out;
}

struct ConvergenceResult {
  double delta_s = 0;
  int N_converged = 0;
  std::vector<int> sizes;
  std::vector<std::vector<cplx>> values;  // values[size][m index], biorthogonal G(2m)
};

// N(delta_s): smallest ring size from which every larger size agrees with the largest one to
// relative tolerance tol, for the biorthogonal G(2m) at each m of the list.
inline ConvergenceResult convergence_in_N(double g, double delta_s, const std::vector<int>& ms,
                                          const std::vector<int>& sizes, double tol,
                                          double J = 1.0, unsigned threads = 1) {
  require(!sizes.empty() && !ms.empty(), ErrorKind::InvalidArgument, "empty size or m list");
  ConvergenceResult res;
  res.delta_s = delta_s;
  res.sizes = sizes;
  res.values.assign(sizes.size(), std::vector<cplx>(ms.size()));
  parallel_for(sizes.size(), threads, [&](std::size_t a) {
    ChainParams p;
    p.N = sizes[a];
    p.J = J;
    p.g = g;
    p.delta_s = delta_s;
    p.delta = g - delta_s;
    const auto blocks = chain_occupied_blocks(p);
    for (std::size_t b = 0; b < ms.size(); ++b)
      res.values[a][b] = chain_correlator(blocks, p.N, 2L * ms[b]).bio;
  });
  const auto& ref = res.values.back();
  auto ok = [&](std::size_t a) {
    for (std::size_t b = 0; b < ms.size(); ++b)
      if (std::abs(res.values[a][b] - ref[b]) > tol * std::abs(ref[b])) return false;
    return true;
  };
  std::size_t idx = sizes.size() - 1;
  while (idx > 0 && ok(idx - 1)) --idx;
  res.N_converged = sizes[idx];
  return res;
}

struct LinearFit {
  double slope = 0, intercept = 0, r2 = 0;
};

inline LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i]; sy += y[i]; sxx += x[i] * x[i]; sxy += x[i] * y[i];
  }
  LinearFit f;
  f.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  f.intercept = (sy - f.slope * sx) / n;
  const double ym = sy / n;
  double ss_res = 0, ss_tot = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (f.intercept + f.slope * x[i]);
    ss_res += e * e;
    ss_tot += (y[i] - ym) * (y[i] - ym);
  }
  f.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  return f;
}

}  // namespace nhqm
