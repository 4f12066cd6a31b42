#pragma once

// Second-variation fields K: covariant derivatives of the endpoint Jacobi
// fields with respect to the endpoints, their +/- combinations, and the
// identities they satisfy on locally symmetric spaces.

#include <array>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "tpc/jacobi.hpp"

namespace tpc {

/// K_{P^alpha Q^beta}: derivative of dGamma/dP^alpha in the direction Q^beta.
enum class KKind { xx, xy, yx, yy };

inline constexpr std::array<KKind, 4> kAllKinds{KKind::xx, KKind::xy, KKind::yx, KKind::yy};

inline const char* to_string(KKind k) {
  switch (k) {
    case KKind::xx: return "xx";
    case KKind::xy: return "xy";
    case KKind::yx: return "yx";
    case KKind::yy: return "yy";
  }
  return "?";
}

inline Endpoint first_endpoint(KKind k) { return k == KKind::xx || k == KKind::xy ? Endpoint::x : Endpoint::y; }
inline Endpoint second_endpoint(KKind k) { return k == KKind::xx || k == KKind::yx ? Endpoint::x : Endpoint::y; }

/// All four kinds for every index pair, sampled on a shared t-grid in
/// frame components.
class KFieldSet {
 public:
  KFieldSet(int dim, std::vector<double> t) : dim_(dim), t_(std::move(t)) {
    data_.assign(4 * static_cast<std::size_t>(dim_) * dim_, Mat::Zero(dim_, static_cast<Eigen::Index>(t_.size())));
  }

  int dim() const { return dim_; }
  const std::vector<double>& t() const { return t_; }
  Mat& at(KKind k, int a, int b) { return data_[index(k, a, b)]; }
  const Mat& at(KKind k, int a, int b) const { return data_[index(k, a, b)]; }

 private:
  std::size_t index(KKind k, int a, int b) const {
    return (static_cast<std::size_t>(k) * dim_ + a) * dim_ + b;
  }
  int dim_;
  std::vector<double> t_;
  std::vector<Mat> data_;
};

struct KCombo {
  int sign = 1;
  int alpha = 0, beta = 0;
  std::vector<double> t;
  Mat comps;
};

namespace detail {

// Profile factor of J_{P^alpha}(t) and its t-derivative.
inline double jac_value(const JacobiProfile& p, Endpoint e, double t) {
  return e == Endpoint::x ? p.v(1.0 - t) : p.v(1.0 + t);
}
inline double jac_rate(const JacobiProfile& p, Endpoint e, double t) {
  return e == Endpoint::x ? -p.vdot(1.0 - t) : p.vdot(1.0 + t);
}

// Component gamma of 2R(J_{P^a}, Gamma')J'_{Q^b} + 2R(J_{Q^b}, Gamma')J'_{P^a}.
inline double k_source(const ParallelFrame& fr, const std::vector<JacobiProfile>& prof, KKind kind, int a, int b,
                       int g, double t) {
  const Endpoint P = first_endpoint(kind), Q = second_endpoint(kind);
  return 2.0 * fr.c(a, b, g) * jac_value(prof[a], P, t) * jac_rate(prof[b], Q, t) +
         2.0 * fr.c(b, a, g) * jac_value(prof[b], Q, t) * jac_rate(prof[a], P, t);
}

// Fails when R(., Gamma')Gamma' is not diagonal in the frame.
inline void assert_diagonal(const ParallelFrame& fr, double tol = 1e-10) {
  if (fr.kappa_defect(-1.0) > tol) throw InvariantViolation("frame does not diagonalize R(., Gamma')Gamma'");
}

}  // namespace detail

/// Solves K'' + R(K, Gamma')Gamma' + source = 0 with zero endpoint data,
/// componentwise in the frame, on n intervals with Richardson extrapolation.
inline KFieldSet k_fields_ode(const ParallelFrame& frame, int n = 800) {
  detail::assert_diagonal(frame);
  const int dim = frame.dim();
  const auto prof = frame_profiles(frame);
  const double s2 = frame.speed() * frame.speed();
  KFieldSet out(dim, detail::uniform_times(n));
  for (KKind kind : kAllKinds)
    for (int a = 0; a < dim; ++a)
      for (int b = 0; b < dim; ++b) {
        Mat& m = out.at(kind, a, b);
        for (int g = 0; g < dim; ++g) {
          if (frame.c(a, b, g) == 0.0 && frame.c(b, a, g) == 0.0) continue;
          const auto src = [&](double t) { return detail::k_source(frame, prof, kind, a, b, g, t); };
          const auto phi = detail::solve_bvp_richardson(frame.kappa(g) * s2, src, n, 0.0, 0.0);
          for (int i = 0; i <= n; ++i) m(g, i) = phi[i];
        }
      }
  return out;
}

namespace detail {

// Closed-form Jacobi field on the segment x'->y' with value W at one end
// and zero at the other, evaluated at t.
inline TangentVec perturbed_jacobi(const ParallelFrame& fr, Endpoint end, const TangentVec& W, double t) {
  const double tb = end == Endpoint::x ? -1.0 : 1.0;
  const Vec w = fr.components(W, tb);
  Vec c(fr.dim());
  for (int d = 0; d < fr.dim(); ++d) {
    const JacobiProfile p(fr.kappa(d), fr.speed());
    c[d] = w[d] * (end == Endpoint::x ? p.v(1.0 - t) : p.v(1.0 + t));
  }
  return fr.from_components(c, t);
}

}  // namespace detail

/// Central finite differences of the endpoint Jacobi fields over endpoint
/// perturbations exp(+-h E_beta). Perturbed fields are compared to the base
/// segment by parallel transport along the short geodesic Gamma'(t) -> Gamma(t).
inline KFieldSet k_fields_fd(const ManifoldModel& M, const Point& x, const Point& y, double h, int n = 80) {
  const GeodesicSegment seg = connect(M, x, y);
  const ParallelFrame frame = build_frame(seg);
  const int dim = frame.dim();
  KFieldSet out(dim, detail::uniform_times(n));
  const auto& ts = out.t();

  for (KKind kind : kAllKinds) {
    const Endpoint P = first_endpoint(kind), Q = second_endpoint(kind);
    const double tP = P == Endpoint::x ? -1.0 : 1.0;
    const double tQ = Q == Endpoint::x ? -1.0 : 1.0;
    for (int b = 0; b < dim; ++b) {
      std::array<std::vector<Mat>, 2> samples;  // [sign][alpha] -> dim x nt
      for (int side = 0; side < 2; ++side) {
        const double step = side == 0 ? h : -h;
        const Point& q = Q == Endpoint::x ? x : y;
        const Point q2 = exp_map(M, q, step * frame.E(b, tQ));
        const Point x2 = Q == Endpoint::x ? q2 : x;
        const Point y2 = Q == Endpoint::y ? q2 : y;
        if (distance(M, x2, y2) >= M.diameter_bound())
          throw DomainViolation("k_fields_fd: perturbation exits the diameter bound");
        const ParallelFrame pf = build_frame(connect(M, x2, y2));
        samples[side].assign(dim, Mat(dim, static_cast<Eigen::Index>(ts.size())));
        for (int a = 0; a < dim; ++a) {
          TangentVec W = frame.E(a, tP);
          if (P == Q) W = transport(M, q, q2, W);
          for (std::size_t k = 0; k < ts.size(); ++k) {
            const TangentVec Jp = detail::perturbed_jacobi(pf, P, W, ts[k]);
            const Point base = seg.at(ts[k]);
            const TangentVec back = transport(M, Jp.base, base, Jp);
            samples[side][a].col(static_cast<Eigen::Index>(k)) = frame.components(back, ts[k]);
          }
        }
      }
      for (int a = 0; a < dim; ++a) out.at(kind, a, b) = (samples[0][a] - samples[1][a]) / (2.0 * h);
    }
  }
  return out;
}

/// K+ = Kxx + Kyy + Kxy + Kyx and K- = Kxx + Kyy - Kxy - Kyx.
inline KCombo k_combo(const KFieldSet& f, int sign, int a, int b) {
  const auto nt = static_cast<Eigen::Index>(f.t().size());
  for (KKind k : kAllKinds)
    if (f.at(k, a, b).cols() != nt || f.at(k, a, b).rows() != f.dim())
      throw GridMismatch("k_combo: inconsistent sample grids");
  const double s = sign >= 0 ? 1.0 : -1.0;
  Mat c = f.at(KKind::xx, a, b) + f.at(KKind::yy, a, b) + s * (f.at(KKind::xy, a, b) + f.at(KKind::yx, a, b));
  return KCombo{sign >= 0 ? 1 : -1, a, b, f.t(), std::move(c)};
}

inline std::vector<KCombo> k_combos(const KFieldSet& f, int sign) {
  std::vector<KCombo> out;
  for (int a = 0; a < f.dim(); ++a)
    for (int b = 0; b < f.dim(); ++b) out.push_back(k_combo(f, sign, a, b));
  return out;
}

/// Index of t = 0 on a symmetric uniform grid.
inline std::size_t midpoint_index(const std::vector<double>& t) {
  if (t.size() % 2 == 0) throw GridMismatch("grid has no midpoint node");
  return t.size() / 2;
}

/// max over components of |<K(t), E_g> + <K(-t), E_g>| on the grid.
inline double combo_oddness(const KCombo& k) {
  const auto n = k.comps.cols();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    worst = std::max(worst, (k.comps.col(i) + k.comps.col(n - 1 - i)).cwiseAbs().maxCoeff());
  return worst;
}

namespace detail {

// Fourth-order second derivative of grid samples with stride H nodes;
// one-sided fourth-order formulas near the ends.
inline double second_derivative(const std::vector<double>& f, std::size_t i, int H, double dt) {
  const auto n = static_cast<long>(f.size());
  const long I = static_cast<long>(i);
  const double h = H * dt;
  auto at = [&](long j) { return f[static_cast<std::size_t>(j)]; };
  if (I - 2 * H >= 0 && I + 2 * H < n)
    return (-at(I - 2 * H) + 16 * at(I - H) - 30 * at(I) + 16 * at(I + H) - at(I + 2 * H)) / (12 * h * h);
  const int dir = I - 2 * H < 0 ? 1 : -1;
  auto g = [&](int k) { return at(I + dir * k * H); };
  return (45 * g(0) - 154 * g(1) + 214 * g(2) - 156 * g(3) + 61 * g(4) - 10 * g(5)) / (12 * h * h);
}

}  // namespace detail

/// Right-hand side of the identity for d^2/dt^2 <K+-, E_g> + kappa_g |Gamma'|^2 <K+-, E_g>.
inline double fundamental_rhs(const ParallelFrame& fr, int sign, int a, int b, int g, double t) {
  const JacobiProfile pa(fr.kappa(a), fr.speed()), pb(fr.kappa(b), fr.speed());
  if (sign > 0)
    return -2.0 * fr.c(a, b, g) * (pa.v(1 - t) + pa.v(1 + t)) * (-pb.vdot(1 - t) + pb.vdot(1 + t)) -
           2.0 * fr.c(b, a, g) * (pb.v(1 - t) + pb.v(1 + t)) * (-pa.vdot(1 - t) + pa.vdot(1 + t));
  return 2.0 * fr.c(a, b, g) * (pa.v(1 - t) - pa.v(1 + t)) * (pb.vdot(1 - t) + pb.vdot(1 + t)) +
         2.0 * fr.c(b, a, g) * (pb.v(1 - t) - pb.v(1 + t)) * (pa.vdot(1 - t) + pa.vdot(1 + t));
}

/// sup_t |LHS - RHS| for one index triple, LHS differentiated from the
/// ODE-method combination sampled on a uniform grid.
inline double fundamental_identity_residual(const ParallelFrame& fr, const KCombo& k, int g, int stride = 1) {
  const std::size_t nt = k.t.size();
  const double dt = k.t[1] - k.t[0];
  std::vector<double> phi(nt);
  for (std::size_t i = 0; i < nt; ++i) phi[i] = k.comps(g, static_cast<Eigen::Index>(i));
  const double s2 = fr.speed() * fr.speed();
  double worst = 0.0;
  for (std::size_t i = 0; i < nt; ++i) {
    const double lhs = detail::second_derivative(phi, i, stride, dt) + fr.kappa(g) * s2 * phi[i];
    worst = std::max(worst, std::abs(lhs - fundamental_rhs(fr, k.sign, k.alpha, k.beta, g, k.t[i])));
  }
  return worst;
}

inline double fundamental_identity_residual(const ParallelFrame& fr, int a, int b, int g, int sign,
                                            const KFieldSet& ode) {
  return fundamental_identity_residual(fr, k_combo(ode, sign, a, b), g);
}

/// The odd forcing of the proof of midpoint vanishing, including its speed
/// factor; returns max |eta(t) + eta(-t)| over a symmetric grid.
inline double eta_oddness(const ParallelFrame& fr, int a, int b, int g, int sign = 1, int n = 200) {
  const JacobiProfile pa(fr.kappa(a), fr.speed()), pb(fr.kappa(b), fr.speed());
  const double sp = fr.speed();
  auto eta = [&](double t) {
    if (sign > 0)
      return fr.c(a, b, g) * sp * (pa.v(1 - t) + pa.v(1 + t)) * (-pb.vdot(1 - t) + pb.vdot(1 + t)) +
             fr.c(b, a, g) * sp * (pb.v(1 - t) + pb.v(1 + t)) * (-pa.vdot(1 - t) + pa.vdot(1 + t));
    return 2.0 * fr.c(a, b, g) * sp * (pa.v(1 - t) - pa.v(1 + t)) * (pb.vdot(1 - t) + pb.vdot(1 + t)) +
           2.0 * fr.c(b, a, g) * sp * (pb.v(1 - t) - pb.v(1 + t)) * (pa.vdot(1 - t) + pa.vdot(1 + t));
  };
  double worst = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double t = static_cast<double>(i) / n;
    worst = std::max(worst, std::abs(eta(t) + eta(-t)));
  }
  return worst;
}

/// CSV rows: t, kind, alpha, beta, then one column per frame component.
inline void write_kfields_csv(std::ostream& os, const KFieldSet& f) {
  os << "t,kind,alpha,beta";
  for (int g = 0; g < f.dim(); ++g) os << ",c" << g;
  os << '\n';
  os.precision(17);
  for (KKind kind : kAllKinds)
    for (int a = 0; a < f.dim(); ++a)
      for (int b = 0; b < f.dim(); ++b) {
        const Mat& m = f.at(kind, a, b);
        for (std::size_t i = 0; i < f.t().size(); ++i) {
          os << f.t()[i] << ',' << to_string(kind) << ',' << a << ',' << b;
          for (int g = 0; g < f.dim(); ++g) os << ',' << m(g, static_cast<Eigen::Index>(i));
          os << '\n';
        }
      }
}

}  // namespace tpc
