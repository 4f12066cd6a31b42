#pragma once

// Closed-form Jacobi fields along a geodesic with prescribed endpoint
// values, the profile functions v, and an independent finite-difference
// boundary-value oracle.

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "tpc/geodesic.hpp"

namespace tpc {

enum class Endpoint { x, y };

namespace detail {

// sin(x)/x truncated after five terms, accurate for |x| < 2e-4.
inline double sinc_series(double x) {
  const double x2 = x * x;
  return 1.0 - x2 / 6.0 + x2 * x2 / 120.0 - x2 * x2 * x2 / 5040.0 + x2 * x2 * x2 * x2 / 362880.0;
}

}  // namespace detail

/// v(t) = sin(a t)/sin(2a) with a = sqrt(kappa)*speed, or t/2 when kappa = 0.
class JacobiProfile {
 public:
  JacobiProfile(double kappa, double speed) : kappa_(kappa), speed_(speed) {
    if (kappa < 0.0 || speed < 0.0) throw DomainViolation("v_profile: negative curvature or speed");
    a_ = std::sqrt(kappa) * speed;
    if (2.0 * a_ >= std::numbers::pi) throw DomainViolation("v_profile: 2 sqrt(kappa) |speed| >= pi");
    series_ = a_ < 1e-4;
    denom_ = series_ ? 2.0 * detail::sinc_series(2.0 * a_) : std::sin(2.0 * a_);
  }

  double kappa() const { return kappa_; }
  double speed() const { return speed_; }

  /// sqrt(kappa) * speed.
  double rate() const { return a_; }

  double v(double t) const {
    if (series_) return t * detail::sinc_series(a_ * t) / denom_;
    return std::sin(a_ * t) / denom_;
  }

  double vdot(double t) const {
    if (series_) return std::cos(a_ * t) / denom_;
    return a_ * std::cos(a_ * t) / denom_;
  }

  /// Second derivative: -a^2 v.
  double vddot(double t) const { return -a_ * a_ * v(t); }

 private:
  double kappa_, speed_, a_ = 0.0, denom_ = 1.0;
  bool series_ = false;
};

inline JacobiProfile v_profile(double kappa, double speed) { return JacobiProfile(kappa, speed); }

inline std::vector<JacobiProfile> frame_profiles(const ParallelFrame& frame) {
  std::vector<JacobiProfile> out;
  out.reserve(frame.dim());
  for (int a = 0; a < frame.dim(); ++a) out.emplace_back(frame.kappa(a), frame.speed());
  return out;
}

/// Frame components of J_{x^alpha}(t) = v(1-t) E_alpha(t), or
/// J_{y^alpha}(t) = v(1+t) E_alpha(t).
inline Vec jacobi_components(const ParallelFrame& frame, Endpoint end, int alpha, double t) {
  const JacobiProfile prof(frame.kappa(alpha), frame.speed());
  Vec c = Vec::Zero(frame.dim());
  c[alpha] = end == Endpoint::x ? prof.v(1.0 - t) : prof.v(1.0 + t);
  return c;
}

inline TangentVec jacobi_closed_form(const ParallelFrame& frame, Endpoint end, int alpha, double t) {
  const JacobiProfile prof(frame.kappa(alpha), frame.speed());
  const double s = end == Endpoint::x ? prof.v(1.0 - t) : prof.v(1.0 + t);
  return s * frame.E(alpha, t);
}

/// Samples of a vector field along the segment in frame components;
/// column k holds the components at t[k].
struct SampledField {
  std::vector<double> t;
  Mat comps;
};

namespace detail {

// Solves phi'' + k phi + s(t) = 0 on [-1, 1] with phi(-1) = left,
// phi(1) = right, by second-order central differences on n intervals.
inline std::vector<double> solve_bvp_fd(double k, const std::function<double(double)>& source, int n,
                                        double left, double right) {
  const double h = 2.0 / n;
  const int m = n - 1;
  std::vector<double> sub(m, 1.0), diag(m, -2.0 + k * h * h), sup(m, 1.0), rhs(m);
  for (int i = 0; i < m; ++i) rhs[i] = -h * h * source(-1.0 + (i + 1) * h);
  rhs[0] -= left;
  rhs[m - 1] -= right;
  // Thomas algorithm.
  for (int i = 1; i < m; ++i) {
    const double w = sub[i] / diag[i - 1];
    diag[i] -= w * sup[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  std::vector<double> phi(n + 1);
  phi[0] = left;
  phi[n] = right;
  phi[m] = rhs[m - 1] / diag[m - 1];
  for (int i = m - 2; i >= 0; --i) phi[i + 1] = (rhs[i] - sup[i] * phi[i + 2]) / diag[i];
  return phi;
}

// Richardson combination of solves on n and 2n intervals, sampled on the
// n-interval grid.
inline std::vector<double> solve_bvp_richardson(double k, const std::function<double(double)>& source,
                                                int n, double left, double right) {
  const auto coarse = solve_bvp_fd(k, source, n, left, right);
  const auto fine = solve_bvp_fd(k, source, 2 * n, left, right);
  std::vector<double> out(n + 1);
  for (int i = 0; i <= n; ++i) out[i] = (4.0 * fine[2 * i] - coarse[i]) / 3.0;
  return out;
}

inline std::vector<double> uniform_times(int n) {
  std::vector<double> t(n + 1);
  for (int i = 0; i <= n; ++i) t[i] = -1.0 + 2.0 * i / n;
  return t;
}

}  // namespace detail

/// Solves J'' + R(J, Gamma')Gamma' = 0 componentwise in the frame with the
/// endpoint data of J_{x^alpha} or J_{y^alpha}; independent of the profiles.
inline SampledField jacobi_bvp_oracle(const ParallelFrame& frame, Endpoint end, int alpha, int n = 400) {
  const int dim = frame.dim();
  SampledField out{detail::uniform_times(n), Mat::Zero(dim, n + 1)};
  const double s2 = frame.speed() * frame.speed();
  const auto zero = [](double) { return 0.0; };
  for (int g = 0; g < dim; ++g) {
    const double bc = g == alpha ? 1.0 : 0.0;
    const double left = end == Endpoint::x ? bc : 0.0;
    const double right = end == Endpoint::x ? 0.0 : bc;
    const auto phi = detail::solve_bvp_richardson(frame.kappa(g) * s2, zero, n, left, right);
    for (int i = 0; i <= n; ++i) out.comps(g, i) = phi[i];
  }
  return out;
}

/// V = diag(1/(2 v_alpha(1))).
struct TransferDiag {
  Vec entries;

  Mat matrix() const { return entries.asDiagonal(); }
};

inline TransferDiag transfer_matrix(const ParallelFrame& frame) {
  TransferDiag V{Vec(frame.dim())};
  for (int a = 0; a < frame.dim(); ++a) {
    const JacobiProfile prof(frame.kappa(a), frame.speed());
    V.entries[a] = 1.0 / (2.0 * prof.v(1.0));
  }
  V.entries[0] = 1.0;
  return V;
}

}  // namespace tpc
