#pragma once

// The two-endpoint geodesic map t -> Gamma(x, y, t) on [-1, 1] and the
// parallel orthonormal frame diagonalizing R(., Gamma') Gamma'.
//
// Frame indices are 0-based: index 0 is the unit velocity direction.

#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>

#include "tpc/geometry.hpp"

namespace tpc {

class GeodesicSegment {
 public:
  GeodesicSegment(ManifoldModel M, Point x, Point y) : M_(std::move(M)), x_(std::move(x)), y_(std::move(y)) {
    const int nf = M_.num_factors();
    angle_.assign(nf, 0.0);
    dir_.assign(nf, Vec());
    delta_.assign(nf, Vec());
    for (int f = 0; f < nf; ++f) {
      const auto a = factor_block(M_, x_.coords, f);
      const auto b = factor_block(M_, y_.coords, f);
      if (!M_.is_sphere(f)) {
        delta_[f] = b - a;
      } else {
        detail::great_circle(a, b, angle_[f], dir_[f]);
        if (angle_[f] == 0.0) dir_[f] = Vec::Zero(a.size());
      }
    }
    speed_ = 0.5 * distance(M_, x_, y_);
  }

  const ManifoldModel& manifold() const { return M_; }
  const Point& x() const { return x_; }
  const Point& y() const { return y_; }

  /// |Gamma'| = d(x, y) / 2.
  double speed() const { return speed_; }

  Point at(double t) const {
    Vec out(M_.ambient_dim());
    const double s = 0.5 * (t + 1.0);
    for (int f = 0; f < M_.num_factors(); ++f) {
      auto o = factor_block(M_, out, f);
      const auto a = factor_block(M_, x_.coords, f);
      if (!M_.is_sphere(f)) {
        o = a + s * delta_[f];
      } else {
        const double phi = angle_[f] * s;
        o = std::cos(phi) * a + std::sin(phi) * dir_[f];
        o /= o.norm();
      }
    }
    return Point{std::move(out)};
  }

  TangentVec velocity(double t) const {
    Point p = at(t);
    Vec v(M_.ambient_dim());
    const double s = 0.5 * (t + 1.0);
    for (int f = 0; f < M_.num_factors(); ++f) {
      auto o = factor_block(M_, v, f);
      const auto a = factor_block(M_, x_.coords, f);
      if (!M_.is_sphere(f)) {
        o = 0.5 * delta_[f];
      } else {
        const double phi = angle_[f] * s;
        o = 0.5 * angle_[f] * (-std::sin(phi) * a + std::cos(phi) * dir_[f]);
      }
    }
    return TangentVec{std::move(p), std::move(v)};
  }

  /// Parallel transport along the segment from Gamma(t0) to Gamma(t1).
  TangentVec transport(const TangentVec& X, double t0, double t1) const {
    Point p0 = at(t0);
    if (!same_point(p0, X.base)) throw BaseMismatch("parallel_transport: vector not based at Gamma(t0)");
    Point p1 = at(t1);
    Vec out = X.v;
    for (int f = 0; f < M_.num_factors(); ++f) {
      if (!M_.is_sphere(f) || angle_[f] == 0.0) continue;
      const auto a = factor_block(M_, x_.coords, f);
      const double phi0 = angle_[f] * 0.5 * (t0 + 1.0);
      const double phi1 = angle_[f] * 0.5 * (t1 + 1.0);
      const Vec w0 = -std::sin(phi0) * a + std::cos(phi0) * dir_[f];
      const Vec w1 = -std::sin(phi1) * a + std::cos(phi1) * dir_[f];
      const auto q0 = factor_block(M_, p0.coords, f);
      const auto q1 = factor_block(M_, p1.coords, f);
      auto o = factor_block(M_, out, f);
      const double along = o.dot(w0);
      const double normal = o.dot(q0);
      const Vec perp = o - along * w0 - normal * q0;
      o = along * w1 + normal * q1 + perp;
    }
    return TangentVec{std::move(p1), std::move(out)};
  }

 private:
  ManifoldModel M_;
  Point x_, y_;
  std::vector<double> angle_;
  std::vector<Vec> dir_;
  std::vector<Vec> delta_;
  double speed_ = 0.0;
};

/// Minimizing geodesic with Gamma(-1) = x and Gamma(1) = y.
inline GeodesicSegment connect(const ManifoldModel& M, const Point& x, const Point& y) {
  if (same_point(x, y, 1e-15)) throw DegenerateSegment("connect: x == y");
  (void)log_map(M, x, y);  // cut-locus and diameter checks
  GeodesicSegment seg(M, x, y);
  if (seg.speed() == 0.0) throw DegenerateSegment("connect: x == y");
  return seg;
}

inline TangentVec parallel_transport(const GeodesicSegment& seg, const TangentVec& X, double t0, double t1) {
  return seg.transport(X, t0, t1);
}

class ParallelFrame {
 public:
  ParallelFrame(GeodesicSegment seg, std::vector<TangentVec> initial, std::vector<double> kappas)
      : seg_(std::move(seg)), initial_(std::move(initial)), kappas_(std::move(kappas)) {
    const int n = dim();
    c_.assign(static_cast<std::size_t>(n) * n * n, 0.0);
    const auto& M = seg_.manifold();
    const TangentVec g = seg_.velocity(-1.0);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        const TangentVec r = curvature_op(M, initial_[a], g, initial_[b]);
        for (int c = 0; c < n; ++c) c_[index(a, b, c)] = metric_inner(M, r, initial_[c]);
      }
  }

  const GeodesicSegment& segment() const { return seg_; }
  const ManifoldModel& manifold() const { return seg_.manifold(); }
  int dim() const { return static_cast<int>(initial_.size()); }
  double speed() const { return seg_.speed(); }

  /// kappa_alpha: eigenvalues of R(., Gamma')Gamma' / |Gamma'|^2; kappa(0) == 0.
  double kappa(int alpha) const { return kappas_[alpha]; }
  const std::vector<double>& kappas() const { return kappas_; }

  TangentVec E(int alpha, double t) const {
    if (t == -1.0) return initial_[alpha];
    return seg_.transport(initial_[alpha], -1.0, t);
  }

  std::vector<TangentVec> frame_at(double t) const {
    std::vector<TangentVec> out;
    out.reserve(initial_.size());
    for (int a = 0; a < dim(); ++a) out.push_back(E(a, t));
    return out;
  }

  /// Frame components of a vector based at Gamma(t).
  Vec components(const TangentVec& X, double t) const {
    return components_in(manifold(), frame_at(t), X);
  }

  TangentVec from_components(const Vec& comps, double t) const {
    const auto fr = frame_at(t);
    return combine(manifold(), fr.front().base, fr, comps);
  }

  /// c_{abc} = <R(E_a, Gamma') E_b, E_c>, evaluated once at t = -1.
  double c(int a, int b, int cc) const { return c_[index(a, b, cc)]; }

  /// Largest deviation of <R(E_a, Gamma')E_b, E_c>(t) from the stored c.
  double c_constancy_defect(double t) const {
    const int n = dim();
    const auto& M = manifold();
    const auto fr = frame_at(t);
    const TangentVec g = seg_.velocity(t);
    double worst = 0.0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        const TangentVec r = curvature_op(M, fr[a], g, fr[b]);
        for (int cc = 0; cc < n; ++cc)
          worst = std::max(worst, std::abs(metric_inner(M, r, fr[cc]) - c(a, b, cc)));
      }
    return worst;
  }

  /// Largest deviation of <R(E_a,Gamma')Gamma', E_b> from kappa_a |Gamma'|^2 delta_ab.
  double kappa_defect(double t) const {
    const int n = dim();
    const auto& M = manifold();
    const auto fr = frame_at(t);
    const TangentVec g = seg_.velocity(t);
    const double s2 = speed() * speed();
    double worst = 0.0;
    for (int a = 0; a < n; ++a) {
      const TangentVec r = curvature_op(M, fr[a], g, g);
      for (int b = 0; b < n; ++b) {
        const double expect = a == b ? kappas_[a] * s2 : 0.0;
        worst = std::max(worst, std::abs(metric_inner(M, r, fr[b]) - expect));
      }
    }
    return worst;
  }

  /// Largest deviation from orthonormality at time t.
  double orthonormality_defect(double t) const {
    const auto fr = frame_at(t);
    double worst = 0.0;
    for (int a = 0; a < dim(); ++a)
      for (int b = 0; b < dim(); ++b)
        worst = std::max(worst, std::abs(metric_inner(manifold(), fr[a], fr[b]) - (a == b ? 1.0 : 0.0)));
    return worst;
  }

 private:
  std::size_t index(int a, int b, int c) const {
    const auto n = static_cast<std::size_t>(dim());
    return (static_cast<std::size_t>(a) * n + b) * n + c;
  }

  GeodesicSegment seg_;
  std::vector<TangentVec> initial_;
  std::vector<double> kappas_;
  std::vector<double> c_;
};

/// Diagonalizes R(., Gamma')Gamma' at x on the orthogonal complement of the
/// velocity, sorts eigenvalues ascending and resolves repeated eigenvalues
/// by Gram-Schmidt of the projected canonical basis, so each eigenspace
/// basis is a deterministic function of the eigenspace.
inline ParallelFrame build_frame(const GeodesicSegment& seg) {
  const auto& M = seg.manifold();
  const int n = M.dim();
  const double speed = seg.speed();
  if (!(speed > 0.0)) throw DegenerateSegment("build_frame: degenerate segment");
  const Point& x = seg.x();
  const TangentVec g = seg.velocity(-1.0);
  const TangentVec e1 = (1.0 / speed) * g;

  // Orthonormal basis of the complement of e1.
  std::vector<TangentVec> comp;
  {
    std::vector<TangentVec> accepted{e1};
    for (const auto& b : tangent_basis(M, x)) {
      TangentVec c = b;
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& a : accepted) c = c - metric_inner(M, c, a) * a;
      const double nrm = metric_norm(M, c);
      if (nrm < 1e-8) continue;
      c = (1.0 / nrm) * c;
      accepted.push_back(c);
      comp.push_back(c);
      if (static_cast<int>(comp.size()) == n - 1) break;
    }
  }
  const int m = static_cast<int>(comp.size());

  std::vector<TangentVec> frame{e1};
  std::vector<double> kappas{0.0};
  if (m > 0) {
    Mat S(m, m);
    for (int i = 0; i < m; ++i) {
      const TangentVec r = curvature_op(M, comp[i], g, g);
      for (int j = 0; j < m; ++j) S(i, j) = metric_inner(M, r, comp[j]);
    }
    S = 0.5 * (S + S.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Mat> es(S);
    const Vec lam = es.eigenvalues();
    const Mat vecs = es.eigenvectors();
    const double scale = std::max(1.0, lam.cwiseAbs().maxCoeff());
    int start = 0;
    while (start < m) {
      int end = start + 1;
      while (end < m && lam[end] - lam[start] < 1e-9 * scale) ++end;
      const int k = end - start;
      const Mat block = vecs.middleCols(start, k);
      const Mat P = block * block.transpose();
      double mean = lam.segment(start, k).mean();
      if (std::abs(mean) < 1e-13 * scale) mean = 0.0;
      std::vector<Vec> chosen;
      for (int j = 0; j < m && static_cast<int>(chosen.size()) < k; ++j) {
        Vec c = P.col(j);
        for (int pass = 0; pass < 2; ++pass)
          for (const auto& a : chosen) c -= c.dot(a) * a;
        if (c.norm() < 1e-6) continue;
        chosen.push_back(c / c.norm());
      }
      for (const auto& coef : chosen) {
        Vec v = Vec::Zero(M.ambient_dim());
        for (int i = 0; i < m; ++i) v += coef[i] * comp[i].v;
        frame.push_back(TangentVec{x, std::move(v)});
        kappas.push_back(std::max(0.0, mean) / (speed * speed));
      }
      start = end;
    }
  }
  return ParallelFrame(seg, std::move(frame), std::move(kappas));
}

/// c_{abc} at t = -1, audited for constancy at t in {-0.5, 0, 0.5, 1}.
inline std::vector<double> curvature_constants(const ParallelFrame& frame, double tol = 1e-10) {
  for (double t : {-0.5, 0.0, 0.5, 1.0}) {
    const double d = frame.c_constancy_defect(t);
    if (d > tol) throw InvariantViolation("curvature constants vary along the geodesic");
  }
  const int n = frame.dim();
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n) * n * n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) out.push_back(frame.c(a, b, c));
  return out;
}

}  // namespace tpc
