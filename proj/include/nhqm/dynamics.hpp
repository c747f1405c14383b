#pragma once

#include <unsupported/Eigen/MatrixFunctions>

#include <optional>
#include <string>
#include <vector>

#include "biortho.hpp"
#include "metric.hpp"

namespace nhqm {

struct PureState {
  Vec amplitudes;
  std::string basis = "site";

  PureState() = default;
  PureState(Vec v, std::string b = "site") : amplitudes(std::move(v)), basis(std::move(b)) {}
  double norm2() const { return amplitudes.squaredNorm(); }
};

enum class Direction { Forward, Adjoint };

// U(t) = sum_nu e^{-i E_nu t} |R_nu><L_nu|; the adjoint direction gives U(t)^dag.
class Propagator {
 public:
  explicit Propagator(BiorthoEigensystem es, Direction dir = Direction::Forward)
      : es_(std::move(es)), dir_(dir), Ldag_(es_.L.adjoint()), Rdag_(es_.R.adjoint()) {}

  const BiorthoEigensystem& eigensystem() const { return es_; }
  Direction direction() const { return dir_; }

  Vec phases(double t) const {
    Vec p(es_.dim());
    for (Eigen::Index i = 0; i < es_.dim(); ++i) {
      p(i) = dir_ == Direction::Forward ? std::exp(-I * es_.E(i) * t)
                                         : std::exp(I * std::conj(es_.E(i)) * t);
    }
    return p;
  }

  Mat matrix(double t) const {
    const Vec p = phases(t);
    if (dir_ == Direction::Forward) return es_.R * p.asDiagonal() * Ldag_;
    return es_.L * p.asDiagonal() * Rdag_;
  }

  Vec apply(const Vec& v, double t) const {
    const Vec p = phases(t);
    if (dir_ == Direction::Forward) return es_.R * (p.asDiagonal() * (Ldag_ * v));
    return es_.L * (p.asDiagonal() * (Rdag_ * v));
  }

 private:
  BiorthoEigensystem es_;
  Direction dir_;
  Mat Ldag_, Rdag_;
};

inline PureState evolve_state(const Propagator& prop, const PureState& psi0, double t) {
  require(std::isfinite(t), ErrorKind::InvalidArgument, "time must be finite");
  require(psi0.amplitudes.size() == prop.eigensystem().dim(), ErrorKind::DimensionMismatch,
          "state/propagator size mismatch");
  return PureState(prop.apply(psi0.amplitudes, t), psi0.basis);
}

enum class ConventionKind { Hermitian, PT, Biorthogonal };

struct Convention {
  ConventionKind kind = ConventionKind::Hermitian;
  Mat metric;  // eta_r for PT, g for Biorthogonal; empty for Hermitian

  static Convention hermitian() { return {}; }
  static Convention pt(const MetricOperator& eta) { return {ConventionKind::PT, eta.matrix}; }
  static Convention biorthogonal(const Mat& g) { return {ConventionKind::Biorthogonal, g}; }
};

// <psi|M O|psi> / <psi|M|psi> with M = 1, eta_r or g.
inline cplx expval(const Mat& O, const PureState& psi, const Convention& conv) {
  const Vec& v = psi.amplitudes;
  require(O.rows() == v.size() && O.cols() == v.size(), ErrorKind::DimensionMismatch,
          "operator/state size mismatch");
  cplx num, den;
  if (conv.kind == ConventionKind::Hermitian) {
    num = v.dot(O * v);
    den = v.squaredNorm();
  } else {
    require(conv.metric.rows() == v.size(), ErrorKind::DimensionMismatch,
            "metric/state size mismatch");
    const Vec Mv = conv.metric * v;
    num = Mv.dot(O * v);  // metric is Hermitian, so <psi|M = (M psi)^dag
    den = v.dot(Mv);
  }
  const double floor = 1e-300 + 1e-14 * v.squaredNorm() *
                                    (conv.metric.size() ? conv.metric.norm() : 1.0);
  require(std::abs(den) > floor, ErrorKind::ZeroNormState, "expectation-value denominator vanishes");
  return num / den;
}

struct DensityMatrix {
  Mat matrix;
  bool non_hermitian = false;

  DensityMatrix() = default;
  explicit DensityMatrix(Mat m, bool nh = false) : matrix(std::move(m)), non_hermitian(nh) {}
  cplx trace() const { return matrix.trace(); }
};

// rho(t) = e^{-iHt} rho_0 e^{iH^dag t}
inline DensityMatrix evolve_density(const Propagator& prop, const DensityMatrix& rho0, double t) {
  require(rho0.matrix.rows() == prop.eigensystem().dim(), ErrorKind::DimensionMismatch,
          "density/propagator size mismatch");
  Propagator fwd(prop.eigensystem(), Direction::Forward);
  const Mat U = fwd.matrix(t);
  return DensityMatrix(U * rho0.matrix * U.adjoint(), rho0.non_hermitian);
}

// max over the grid of ||rho(t) - rho(0)||_F
inline double stationarity_residual(const Propagator& prop, const DensityMatrix& rho0,
                                    const std::vector<double>& t_grid) {
  double r = 0;
  for (double t : t_grid) r = std::max(r, (evolve_density(prop, rho0, t).matrix - rho0.matrix).norm());
  return r;
}

struct CanonicalEnsemble {
  DensityMatrix rho;
  cplx Z;
};

namespace detail {

// Boltzmann weights shifted by the lowest real part so large beta does not overflow.
inline Vec boltzmann_weights(const Vec& E, double beta, double& shift) {
  shift = E.real().minCoeff();
  Vec w(E.size());
  for (Eigen::Index i = 0; i < E.size(); ++i) w(i) = std::exp(-beta * (E(i) - shift));
  return w;
}

}  // namespace detail

inline CanonicalEnsemble rho_can(const BiorthoEigensystem& es, double beta) {
  require(beta >= 0 && std::isfinite(beta), ErrorKind::InvalidArgument, "beta must be >= 0");
  double shift = 0;
  const Vec w = detail::boltzmann_weights(es.E, beta, shift);
  const cplx zs = w.sum();
  require(std::abs(zs) > 1e-14 * w.cwiseAbs().sum(), ErrorKind::ZeroPartitionFunction,
          "partition function vanishes");
  Mat rho = es.R * (w / zs).asDiagonal() * es.L.adjoint();
  const Mat H = spectral_reconstruction(es);
  const bool nh = hermiticity_residual(H) > 1e-10 * std::max(1.0, H.norm());
  return {DensityMatrix(std::move(rho), nh), zs * std::exp(-beta * shift)};
}

inline DensityMatrix rho_nH(const BiorthoEigensystem& es, double beta) {
  require(beta >= 0 && std::isfinite(beta), ErrorKind::InvalidArgument, "beta must be >= 0");
  for (Eigen::Index i = 0; i < es.dim(); ++i)
    require(es.is_real(i), ErrorKind::SpectrumNotReal,
            "no stationary mixed ensemble is constructed for complex spectra");
  double shift = 0;
  const Eigen::VectorXd w = detail::boltzmann_weights(es.E, beta, shift).real();
  const double z = w.sum();
  require(z > 0, ErrorKind::ZeroPartitionFunction, "partition function vanishes");
  Mat rho = Mat::Zero(es.dim(), es.dim());
  for (Eigen::Index i = 0; i < es.dim(); ++i)
    rho += (w(i) / z / es.R.col(i).squaredNorm()) * es.R.col(i) * es.R.col(i).adjoint();
  return DensityMatrix(hermitize(rho), false);
}

// ---------------------------------------------------------------- linear response

// Uniform samples f(k dt), k = 0..n-1, linearly interpolated; f(t < 0) = 0.
struct SampledFunction {
  double dt = 1e-3;
  std::vector<double> values;

  double operator()(double t) const {
    if (t < 0 || values.empty()) return 0.0;
    const double x = t / dt;
    const auto k = static_cast<std::size_t>(std::floor(x));
    if (k + 1 >= values.size()) return values.back();
    const double a = x - static_cast<double>(k);
    return (1 - a) * values[k] + a * values[k + 1];
  }
  double t_max() const { return dt * static_cast<double>(values.size() - 1); }

  template <class F>
  static SampledFunction sample(F&& f, double dt, double t_max) {
    SampledFunction s;
    s.dt = dt;
    const auto n = static_cast<std::size_t>(std::llround(t_max / dt)) + 1;
    s.values.resize(n);
    for (std::size_t k = 0; k < n; ++k) s.values[k] = f(dt * static_cast<double>(k));
    return s;
  }
};

struct ResponseSpec {
  Mat O;
  Mat D;
  SampledFunction f;
  MetricOperator eta0;
};

namespace detail {

inline void check_response_inputs(const Mat& H0, const DensityMatrix& rho, const ResponseSpec& spec) {
  require_square_finite(H0, "H0");
  const auto n = H0.rows();
  require(spec.O.rows() == n && spec.D.rows() == n && rho.matrix.rows() == n &&
              spec.eta0.matrix.rows() == n,
          ErrorKind::DimensionMismatch, "response operands must share the dimension of H0");
  require(hermiticity_residual(spec.O) < 1e-10 * std::max(1.0, spec.O.norm()) &&
              hermiticity_residual(spec.D) < 1e-10 * std::max(1.0, spec.D.norm()),
          ErrorKind::NonHermitianPerturbation, "O and D must be Hermitian");
  // Stationarity under the generalized von Neumann equation i d(rho)/dt = H rho - rho H^dag.
  const double res = (H0 * rho.matrix - rho.matrix * H0.adjoint()).norm() /
                     std::max(1.0, H0.norm() * rho.matrix.norm());
  require(res < 1e-8, ErrorKind::NonStationaryInitialDensity,
          "initial density is not stationary under H0 (residual " + std::to_string(res) + ")");
}

inline std::size_t grid_index(const SampledFunction& f, double t) {
  require(std::isfinite(t) && t >= 0, ErrorKind::InvalidArgument, "response time must be >= 0");
  const double x = t / f.dt;
  const auto k = static_cast<std::size_t>(std::llround(x));
  require(std::abs(x - static_cast<double>(k)) < 1e-9 * std::max(1.0, x), ErrorKind::InvalidArgument,
          "response time must lie on the sampling grid of f");
  require(k < f.values.size(), ErrorKind::InvalidArgument, "response time exceeds sampled range of f");
  return k;
}

}  // namespace detail

// delta<O>(t) = int_0^t f(t') chi(t - t') dt'
//             - <O>_0 * i int_0^t f(t') Tr rho [D_D^dag(t' - t) - D_D(t' - t)] dt'
// with chi(s) = -i Tr rho [eta0 Omega_D(s), eta0 Delta_D(0)], Omega = eta0^-1 O, Delta = eta0^-1 D,
// X_D(s) = e^{iH0 s} X e^{-iH0 s}. The trace of rho is normalized to one first.
inline double linear_response(const Mat& H0, const MetricOperator& eta0, const DensityMatrix& rho_in,
                              const ResponseSpec& spec, double t) {
  ResponseSpec sp = spec;
  sp.eta0 = eta0;
  detail::check_response_inputs(H0, rho_in, sp);
  const auto K = detail::grid_index(spec.f, t);
  if (K == 0) return 0.0;

  const cplx tr = rho_in.trace();
  require(std::abs(tr) > 1e-300, ErrorKind::ZeroPartitionFunction, "density has zero trace");
  const Mat rho = rho_in.matrix / tr;
  const auto es = biortho_decompose(H0);
  const Propagator U(es);
  const Mat Omega = solve_inverse(eta0.matrix, "eta0") * spec.O;
  const Mat Delta = solve_inverse(eta0.matrix, "eta0") * spec.D;
  const Mat etaDelta = eta0.matrix * Delta;
  const cplx O0 = (rho * spec.O).trace();

  auto heis = [&](const Mat& X, double s) {
    const Mat u = U.matrix(s);
    const Mat uinv = U.matrix(-s);
    return Mat(uinv * X * u);
  };

  const double dt = spec.f.dt;
  cplx acc = 0;
  for (std::size_t k = 0; k <= K; ++k) {
    const double fk = spec.f.values[k];
    if (fk == 0.0) continue;
    const double tp = dt * static_cast<double>(k);
    const double s = t - tp;
    const Mat etaOmega = eta0.matrix * heis(Omega, s);
    const cplx chi = -I * (rho * (etaOmega * etaDelta - etaDelta * etaOmega)).trace();
    const Mat DD = heis(spec.D, -s);
    const cplx norm_term = I * (rho * (DD.adjoint() - DD)).trace();
    const double wq = (k == 0 || k == K) ? 0.5 : 1.0;
    acc += wq * fk * (chi - O0 * norm_term);
  }
  return (acc * dt).real();
}

struct OracleResult {
  double value = 0;
  int steps = 0;
};

// Nonperturbative reference: rho evolved under H0 + eps f(t) D by midpoint-rule exact
// exponential steps; the step count doubles until the relative change drops below 1e-8.
inline OracleResult response_oracle_detail(const Mat& H0, const DensityMatrix& rho_in,
                                           const ResponseSpec& spec, double t, double eps) {
  require(eps != 0.0 && std::isfinite(eps), ErrorKind::InvalidArgument, "eps must be nonzero");
  detail::check_response_inputs(H0, rho_in, spec);
  require(t >= 0 && t <= spec.f.t_max() + 1e-12, ErrorKind::InvalidArgument,
          "oracle time outside the sampled range of f");
  const Mat rho = rho_in.matrix / rho_in.trace();

  auto expect = [&](const Mat& r) { return ((r * spec.O).trace() / r.trace()).real(); };
  const Mat U0 = Propagator(biortho_decompose(H0)).matrix(t);
  const double base = expect(U0 * rho * U0.adjoint());

  auto run = [&](int n) {
    const double h = t / n;
    Mat U = identity(H0.rows());
    for (int k = 0; k < n; ++k) {
      const double tm = (k + 0.5) * h;
      const Mat step = (-I * h * (H0 + eps * spec.f(tm) * spec.D)).exp();
      U = step * U;
    }
    return (expect(U * rho * U.adjoint()) - base) / eps;
  };

  if (t == 0) return {0.0, 0};
  int n = 64;
  double prev = run(n);
  for (int it = 0; it < 14; ++it) {
    n *= 2;
    const double cur = run(n);
    const double scale = std::max(std::abs(cur), 1e-14 / std::abs(eps));
    if (std::abs(cur - prev) < 1e-8 * scale) return {cur, n};
    prev = cur;
  }
  throw Error(ErrorKind::StepSizeNotConverged, "oracle step halving did not converge");
}

inline double response_oracle(const Mat& H0, const DensityMatrix& rho, const ResponseSpec& spec,
                              double t, double eps) {
  return response_oracle_detail(H0, rho, spec, t, eps).value;
}

}  // namespace nhqm
