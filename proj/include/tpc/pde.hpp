#pragma once

// Chart-grid solvers for -Lap u = b(x, u) with Dirichlet data, implicit Euler
// heat flow, the eps-perturbed problem and the exponential time rescaling.

#include <cmath>
#include <functional>
#include <memory>
#include <vector>

#include <Eigen/SparseLU>

#include "tpc/field.hpp"

namespace tpc {

struct SolveInfo {
  int iterations = 0;
  double residual = 0.0;  // sup norm of the discrete equations
  double last_update = 0.0;
};

struct NewtonOptions {
  int max_iterations = 50;
  double tolerance = 1e-10;  // sup norm of the last accepted update
};

namespace detail {

using ScalarFn = std::function<double(const Point&)>;

// Rows: interior -> -L + diag(shift); dirichlet -> identity; duplicate -> tie to center.
inline SpMat system_matrix(const ChartGrid& g, const SpMat& L, const Vec& shift) {
  std::vector<Eigen::Triplet<double>> T;
  T.reserve(static_cast<std::size_t>(L.nonZeros()) + g.size());
  for (int k = 0; k < L.outerSize(); ++k)
    for (SpMat::InnerIterator it(L, k); it; ++it) T.emplace_back(it.row(), it.col(), -it.value());
  for (int k = 0; k < g.size(); ++k) {
    switch (g.role(k)) {
      case NodeRole::interior:
        if (shift[k] != 0.0) T.emplace_back(k, k, shift[k]);
        break;
      case NodeRole::dirichlet: T.emplace_back(k, k, 1.0); break;
      case NodeRole::duplicate:
        T.emplace_back(k, k, 1.0);
        T.emplace_back(k, g.center_of(k), -1.0);
        break;
    }
  }
  SpMat A(g.size(), g.size());
  A.setFromTriplets(T.begin(), T.end());
  A.makeCompressed();
  return A;
}

inline Vec boundary_values(const ChartGrid& g, const ScalarFn& bc) {
  Vec out = Vec::Zero(g.size());
  for (int k = 0; k < g.size(); ++k)
    if (g.role(k) == NodeRole::dirichlet) out[k] = bc(g.point(k));
  return out;
}

inline Vec lu_solve(const SpMat& A, const Vec& rhs) {
  Eigen::SparseLU<SpMat> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw SolverFailure("sparse factorization failed");
  Vec x = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !x.allFinite()) throw SolverFailure("sparse solve failed");
  return x;
}

// Residual of -L u - b(u) + eps u at interior nodes and of the constraint rows.
inline Vec semilinear_residual(const ChartGrid& g, const SpMat& L, const std::vector<Point>& pts,
                               const SemilinearSpec& b, double eps, const Vec& bc, const Vec& u) {
  Vec F = -(L * u);
  for (int k = 0; k < g.size(); ++k) {
    switch (g.role(k)) {
      case NodeRole::interior: F[k] += -b(pts[k], u[k], 0.0) + eps * u[k]; break;
      case NodeRole::dirichlet: F[k] = u[k] - bc[k]; break;
      case NodeRole::duplicate: F[k] = u[k] - u[g.center_of(k)]; break;
    }
  }
  return F;
}

}  // namespace detail

/// -Lap u = rhs in the domain, u = bc on the boundary.
inline ScalarField solve_poisson(const ChartGrid& g, const detail::ScalarFn& rhs, const detail::ScalarFn& bc,
                                 Provenance prov = {}, SolveInfo* info = nullptr) {
  const SpMat L = g.laplacian();
  const SpMat A = detail::system_matrix(g, L, Vec::Zero(g.size()));
  Vec f = detail::boundary_values(g, bc);
  for (int k = 0; k < g.size(); ++k)
    if (g.role(k) == NodeRole::interior) f[k] = rhs(g.point(k));
  Vec u = detail::lu_solve(A, f);
  const double res = (A * u - f).lpNorm<Eigen::Infinity>();
  const double norm_a = Vec(A.cwiseAbs() * Vec::Ones(g.size())).maxCoeff();
  const double rel = res / (norm_a * u.lpNorm<Eigen::Infinity>() + f.lpNorm<Eigen::Infinity>());
  if (!(rel < 1e-10)) throw SolverFailure("linear solve residual above tolerance");
  if (info) *info = {1, rel, 0.0};
  return ScalarField(g, std::move(u), std::move(prov));
}

/// -Lap u = 1 with zero boundary values.
inline ScalarField solve_torsion(const ChartGrid& g, SolveInfo* info = nullptr) {
  Provenance prov;
  prov.equation = "torsion";
  prov.b = SemilinearSpec::constant(1.0);
  return solve_poisson(
      g, [](const Point&) { return 1.0; }, [](const Point&) { return 0.0; }, prov, info);
}

/// Damped Newton for -Lap u = b(x, u) - eps u with u = bc on the boundary.
inline ScalarField solve_semilinear(const ChartGrid& g, const SemilinearSpec& b, double eps, const detail::ScalarFn& bc,
                                    Vec initial, Provenance prov = {}, NewtonOptions opt = {},
                                    SolveInfo* info = nullptr) {
  if (b.kind == BKind::gradient_coupled)
    throw ConfigError("gradient-coupled right-hand sides are handled through the heat log transform");
  const SpMat L = g.laplacian();
  std::vector<Point> pts(g.size());
  for (int k = 0; k < g.size(); ++k) pts[k] = g.point(k);
  const Vec bcv = detail::boundary_values(g, bc);
  Vec u = std::move(initial);
  if (u.size() != g.size()) throw GridMismatch("initial guess does not match the grid");
  for (int k = 0; k < g.size(); ++k)
    if (g.role(k) == NodeRole::dirichlet) u[k] = bcv[k];

  Eigen::SparseLU<SpMat> lu;
  bool analyzed = false;
  Vec F = detail::semilinear_residual(g, L, pts, b, eps, bcv, u);
  double fnorm = F.lpNorm<Eigen::Infinity>();
  for (int it = 1; it <= opt.max_iterations; ++it) {
    Vec shift(g.size());
    for (int k = 0; k < g.size(); ++k) shift[k] = -b.du(pts[k], u[k], 0.0) + eps;
    const SpMat J = detail::system_matrix(g, L, shift);
    if (!analyzed) {
      lu.analyzePattern(J);
      analyzed = true;
    }
    lu.factorize(J);
    if (lu.info() != Eigen::Success) throw SolverFailure("Newton Jacobian factorization failed");
    const Vec step = lu.solve(-F);
    if (!step.allFinite()) throw SolverFailure("Newton step is not finite");
    double lambda = 1.0;
    Vec trial = u + step;
    Vec Ft = detail::semilinear_residual(g, L, pts, b, eps, bcv, trial);
    while (!(Ft.lpNorm<Eigen::Infinity>() < fnorm) && lambda > 1.0 / 1024) {
      lambda *= 0.5;
      trial = u + lambda * step;
      Ft = detail::semilinear_residual(g, L, pts, b, eps, bcv, trial);
    }
    const double update = lambda * step.lpNorm<Eigen::Infinity>();
    u = std::move(trial);
    F = std::move(Ft);
    fnorm = F.lpNorm<Eigen::Infinity>();
    if (update < opt.tolerance) {
      if (info) *info = {it, fnorm, update};
      return ScalarField(g, std::move(u), std::move(prov));
    }
  }
  throw SolverFailure("Newton iteration did not converge");
}

struct LiouvilleOptions {
  double boundary_value = 15.0;  // u = -B on the boundary
  double collar_steps = 5.0;     // trust region excludes this many grid steps
  NewtonOptions newton;
};

/// -Lap u = c exp(-d u) with u = -B on the boundary, by continuation in B.
inline ScalarField solve_liouville(const ChartGrid& g, double c, double d, LiouvilleOptions opt = {},
                                   SolveInfo* info = nullptr) {
  if (c < 0 || d < 0) throw ConfigError("liouville: c and d must be nonnegative");
  const double B = opt.boundary_value;
  const auto b = SemilinearSpec::liouville(c, d);
  Provenance prov;
  prov.equation = "liouville";
  prov.b = b;
  prov.growth_condition = true;
  prov.trust_collar = opt.collar_steps * g.h();
  if (d == 0.0)
    return solve_poisson(
        g, [c](const Point&) { return c; }, [B](const Point&) { return -B; }, prov, info);
  Vec u = Vec::Zero(g.size());
  SolveInfo step_info;
  int total = 0;
  const int stages = std::max(1, static_cast<int>(std::ceil(B / 2.5)));
  for (int s = 1; s <= stages; ++s) {
    const double Bs = B * s / stages;
    const auto field = solve_semilinear(
        g, b, 0.0, [Bs](const Point&) { return -Bs; }, u, prov, opt.newton, &step_info);
    total += step_info.iterations;
    u = field.values();
  }
  if (info) *info = {total, step_info.residual, step_info.last_update};
  return ScalarField(g, std::move(u), std::move(prov));
}

/// -Lap v = b(x, v) - eps v in the inner grid's domain with v = u on its boundary.
inline ScalarField perturbed_solve(const ChartGrid& inner, const SemilinearSpec& b, double eps, const Field& u,
                                   NewtonOptions opt = {}, SolveInfo* info = nullptr) {
  if (eps < 0) throw ConfigError("perturbation parameter must be nonnegative");
  for (int k = 0; k < inner.size(); ++k)
    if (inner.role(k) == NodeRole::dirichlet && !(u.domain().dist_to_boundary(inner.point(k)) > 0.0))
      throw DomainViolation("inner domain is not compactly contained");
  Vec init(inner.size());
  for (int k = 0; k < inner.size(); ++k) init[k] = u.value(inner.point(k));
  Provenance prov = u.provenance();
  prov.equation = "perturbed";
  prov.b = b;
  return solve_semilinear(
      inner, b, eps, [&u](const Point& p) { return u.value(p); }, std::move(init), prov, opt, info);
}

/// ||v_eps - u||_inf / eps on the inner grid nodes for each eps.
inline std::vector<double> perturbation_ratios(const ChartGrid& inner, const SemilinearSpec& b,
                                               const std::vector<double>& eps, const Field& u) {
  std::vector<double> out;
  for (double e : eps) {
    const auto v = perturbed_solve(inner, b, e, u);
    double worst = 0.0;
    for (int k = 0; k < inner.size(); ++k) worst = std::max(worst, std::abs(v.values()[k] - u.value(inner.point(k))));
    out.push_back(worst / e);
  }
  return out;
}

struct HeatOptions {
  bool require_positive = false;
  double bound_tolerance = 1e-10;
};

/// Implicit Euler for u_t = Lap u with boundary values frozen at u0's.
inline TimeSeriesField solve_heat(const ScalarField& u0, double T, int steps, HeatOptions opt = {}) {
  if (!(T > 0) || steps < 1) throw ConfigError("heat: T and steps must be positive");
  const ChartGrid& g = u0.grid();
  const double dt = T / steps;
  const SpMat L = g.laplacian();
  const SpMat A = detail::system_matrix(g, L, Vec::Constant(g.size(), 1.0 / dt));
  Eigen::SparseLU<SpMat> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw SolverFailure("heat factorization failed");

  const double lo = u0.values().minCoeff(), hi = u0.values().maxCoeff();
  if (opt.require_positive && !(lo > 0.0)) throw SolverFailure("heat: initial data not positive");
  Provenance prov = u0.provenance();
  prov.equation = "heat";
  prov.b = SemilinearSpec::constant(0.0);
  TimeSeriesField out;
  out.push(0.0, std::make_shared<const ScalarField>(u0));
  Vec u = u0.values();
  for (int s = 1; s <= steps; ++s) {
    Vec rhs = u / dt;
    for (int k = 0; k < g.size(); ++k) {
      if (g.role(k) == NodeRole::dirichlet) rhs[k] = u0.values()[k];
      if (g.role(k) == NodeRole::duplicate) rhs[k] = 0.0;
    }
    u = lu.solve(rhs);
    if (!u.allFinite()) throw SolverFailure("heat solve failed");
    if (opt.require_positive && !(u.minCoeff() > 0.0)) throw SolverFailure("heat: nonpositive value encountered");
    const double tol = opt.bound_tolerance * std::max(1.0, std::abs(hi));
    if (u.minCoeff() < lo - tol || u.maxCoeff() > hi + tol) throw SolverFailure("heat: discrete maximum principle violated");
    out.push(s * dt, std::make_shared<const ScalarField>(g, u, prov));
  }
  return out;
}

inline std::shared_ptr<const LogTransformedField> log_transform(std::shared_ptr<const Field> f, int sign) {
  return std::make_shared<const LogTransformedField>(std::move(f), sign);
}

/// Applies sign * log to every snapshot.
inline TimeSeriesField log_transform(const TimeSeriesField& s, int sign) {
  TimeSeriesField out;
  for (std::size_t i = 0; i < s.size(); ++i) out.push(s.time(i), log_transform(s.ptr(i), sign));
  return out;
}

/// v(t) = exp(-eps t) u(t) per snapshot.
inline TimeSeriesField evans_transform(const TimeSeriesField& s, double eps) {
  TimeSeriesField out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto* f = dynamic_cast<const ScalarField*>(&s.at(i));
    if (!f) throw ConfigError("time rescaling needs grid snapshots");
    Provenance prov = f->provenance();
    prov.equation = "rescaled " + prov.equation;
    out.push(s.time(i), std::make_shared<const ScalarField>(f->grid(), std::exp(-eps * s.time(i)) * f->values(), prov));
  }
  return out;
}

/// Sup over interior nodes and steps of the time-centered residual
/// (w^{n+1} - w^n)/dt - Lap w_mid - source(t_mid, x, w_mid, |grad w_mid|).
inline double parabolic_residual(const TimeSeriesField& s,
                                 const std::function<double(double, const Point&, double, double)>& source) {
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    const auto& a = dynamic_cast<const ScalarField&>(s.at(i));
    const auto& b = dynamic_cast<const ScalarField&>(s.at(i + 1));
    const ChartGrid& g = a.grid();
    const double dt = s.time(i + 1) - s.time(i), tm = 0.5 * (s.time(i) + s.time(i + 1));
    const ScalarField mid(g, 0.5 * (a.values() + b.values()));
    const Vec Lm = g.laplacian() * mid.values();
    for (int k = 0; k < g.size(); ++k) {
      if (g.role(k) != NodeRole::interior) continue;
      const double grad = mid.nodal_jets().row(k).segment(1, mid.dim()).norm();
      const double r = (b.values()[k] - a.values()[k]) / dt - Lm[k] - source(tm, g.point(k), mid.values()[k], grad);
      worst = std::max(worst, std::abs(r));
    }
  }
  return worst;
}

struct EvansAudit {
  double residual_original = 0.0;
  double residual_rescaled = 0.0;
  bool passed = false;  // rescaled residual at most 5x the original
};

/// Residual of the original series for u_t = Lap u + b and of the rescaled
/// series for v_t = Lap v - eps v + exp(-eps t) b(x, exp(eps t) v, exp(eps t) |grad v|).
inline EvansAudit evans_audit(const TimeSeriesField& u, double eps, const SemilinearSpec& b) {
  const TimeSeriesField v = evans_transform(u, eps);
  EvansAudit a;
  a.residual_original = parabolic_residual(u, [&](double, const Point& x, double w, double g) { return b(x, w, g); });
  a.residual_rescaled = parabolic_residual(v, [&](double t, const Point& x, double w, double g) {
    const double e = std::exp(eps * t);
    return -eps * w + b(x, e * w, e * g) / e;
  });
  a.passed = a.residual_rescaled <= 5.0 * a.residual_original;
  return a;
}

/// Richardson combination (2^p fine - coarse) / (2^p - 1).
inline double richardson(double coarse, double fine, double order = 2.0) {
  const double f = std::pow(2.0, order);
  return (f * fine - coarse) / (f - 1.0);
}

}  // namespace tpc
