#pragma once

// Closed-form geometry of product model spaces built from Euclidean factors
// and round spheres. Sphere factors of curvature kappa are stored as unit
// ambient vectors; the radius 1/sqrt(kappa) only enters through the metric.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "tpc/errors.hpp"

namespace tpc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct Euclidean {
  int dim = 1;
};

struct Sphere {
  int dim = 2;
  double kappa = 1.0;
};

using Factor = std::variant<Euclidean, Sphere>;

class ManifoldModel {
 public:
  ManifoldModel() = default;

  explicit ManifoldModel(std::vector<Factor> factors) : factors_(std::move(factors)) {
    if (factors_.empty()) throw ConfigError("manifold needs at least one factor");
    for (const auto& f : factors_) {
      FactorLayout lay;
      lay.ambient_offset = ambient_dim_;
      lay.intrinsic_offset = dim_;
      if (const auto* e = std::get_if<Euclidean>(&f)) {
        if (e->dim < 1) throw ConfigError("euclidean factor needs dim >= 1");
        lay.ambient_size = e->dim;
        lay.intrinsic_size = e->dim;
      } else {
        const auto& s = std::get<Sphere>(f);
        if (s.dim < 1) throw ConfigError("sphere factor needs dim >= 1");
        if (!(s.kappa > 0.0) || !std::isfinite(s.kappa))
          throw ConfigError("sphere factor needs kappa > 0");
        lay.ambient_size = s.dim + 1;
        lay.intrinsic_size = s.dim;
        lay.kappa = s.kappa;
        curvature_bound_ = std::max(curvature_bound_, s.kappa);
      }
      ambient_dim_ += lay.ambient_size;
      dim_ += lay.intrinsic_size;
      layout_.push_back(lay);
    }
  }

  const std::vector<Factor>& factors() const { return factors_; }
  int num_factors() const { return static_cast<int>(factors_.size()); }
  int dim() const { return dim_; }
  int ambient_dim() const { return ambient_dim_; }

  /// A: the largest sectional curvature (0 when every factor is flat).
  double curvature_bound() const { return curvature_bound_; }

  /// pi / sqrt(A), or +inf for flat models.
  double diameter_bound() const {
    return curvature_bound_ > 0.0 ? std::numbers::pi / std::sqrt(curvature_bound_)
                                  : std::numeric_limits<double>::infinity();
  }

  bool is_sphere(int f) const { return layout_[f].kappa > 0.0; }
  double kappa(int f) const { return layout_[f].kappa; }
  int ambient_offset(int f) const { return layout_[f].ambient_offset; }
  int ambient_size(int f) const { return layout_[f].ambient_size; }
  int intrinsic_offset(int f) const { return layout_[f].intrinsic_offset; }
  int intrinsic_size(int f) const { return layout_[f].intrinsic_size; }

  bool operator==(const ManifoldModel& o) const {
    if (factors_.size() != o.factors_.size()) return false;
    for (std::size_t i = 0; i < factors_.size(); ++i) {
      if (factors_[i].index() != o.factors_[i].index()) return false;
      if (const auto* e = std::get_if<Euclidean>(&factors_[i])) {
        if (e->dim != std::get<Euclidean>(o.factors_[i]).dim) return false;
      } else {
        const auto& a = std::get<Sphere>(factors_[i]);
        const auto& b = std::get<Sphere>(o.factors_[i]);
        if (a.dim != b.dim || a.kappa != b.kappa) return false;
      }
    }
    return true;
  }

  std::string describe() const {
    std::string out;
    for (const auto& f : factors_) {
      if (!out.empty()) out += " x ";
      if (const auto* e = std::get_if<Euclidean>(&f)) {
        out += "E" + std::to_string(e->dim);
      } else {
        const auto& s = std::get<Sphere>(f);
        char buf[64];
        std::snprintf(buf, sizeof buf, "S%d(k=%g)", s.dim, s.kappa);
        out += buf;
      }
    }
    return out;
  }

 private:
  struct FactorLayout {
    int ambient_offset = 0;
    int ambient_size = 0;
    int intrinsic_offset = 0;
    int intrinsic_size = 0;
    double kappa = 0.0;
  };

  std::vector<Factor> factors_;
  std::vector<FactorLayout> layout_;
  int dim_ = 0;
  int ambient_dim_ = 0;
  double curvature_bound_ = 0.0;
};

/// Concatenated per-factor ambient coordinates.
struct Point {
  Vec coords;
};

/// Tangent vector in ambient coordinates; sphere blocks are orthogonal to the
/// base unit vector.
struct TangentVec {
  Point base;
  Vec v;
};

inline auto factor_block(const ManifoldModel& M, Vec& v, int f) {
  return v.segment(M.ambient_offset(f), M.ambient_size(f));
}
inline auto factor_block(const ManifoldModel& M, const Vec& v, int f) {
  return v.segment(M.ambient_offset(f), M.ambient_size(f));
}

inline bool same_point(const Point& a, const Point& b, double tol = 1e-9) {
  return a.coords.size() == b.coords.size() && (a.coords - b.coords).lpNorm<Eigen::Infinity>() <= tol;
}

inline void require_same_base(const TangentVec& X, const TangentVec& Y) {
  if (!same_point(X.base, Y.base)) throw BaseMismatch("tangent vectors have different base points");
}

/// Builds a point from ambient coordinates, normalizing sphere blocks.
inline Point make_point(const ManifoldModel& M, Vec coords) {
  if (coords.size() != M.ambient_dim()) throw ConfigError("point has wrong ambient dimension");
  for (int f = 0; f < M.num_factors(); ++f) {
    if (!M.is_sphere(f)) continue;
    auto blk = factor_block(M, coords, f);
    const double n = blk.norm();
    if (!(n > 0.0)) throw DomainViolation("sphere coordinate must be nonzero");
    blk /= n;
  }
  return Point{std::move(coords)};
}

/// Removes the normal component of every sphere block.
inline TangentVec make_tangent(const ManifoldModel& M, const Point& p, Vec v) {
  for (int f = 0; f < M.num_factors(); ++f) {
    if (!M.is_sphere(f)) continue;
    auto blk = factor_block(M, v, f);
    const auto base = factor_block(M, p.coords, f);
    blk -= blk.dot(base) * base;
  }
  return TangentVec{p, std::move(v)};
}

inline TangentVec zero_tangent(const ManifoldModel& M, const Point& p) {
  return TangentVec{p, Vec::Zero(M.ambient_dim())};
}

inline double metric_inner(const ManifoldModel& M, const TangentVec& X, const TangentVec& Y) {
  require_same_base(X, Y);
  double sum = 0.0;
  for (int f = 0; f < M.num_factors(); ++f) {
    const double d = factor_block(M, X.v, f).dot(factor_block(M, Y.v, f));
    sum += M.is_sphere(f) ? d / M.kappa(f) : d;
  }
  return sum;
}

inline double metric_norm(const ManifoldModel& M, const TangentVec& X) {
  return std::sqrt(std::max(0.0, metric_inner(M, X, X)));
}

inline TangentVec operator+(TangentVec a, const TangentVec& b) {
  require_same_base(a, b);
  a.v += b.v;
  return a;
}
inline TangentVec operator-(TangentVec a, const TangentVec& b) {
  require_same_base(a, b);
  a.v -= b.v;
  return a;
}
inline TangentVec operator*(double s, TangentVec a) {
  a.v *= s;
  return a;
}

namespace detail {

// Great-circle data between unit vectors p and q: angle and unit direction
// orthogonal to p. Returns false when p == q.
inline bool great_circle(const Eigen::Ref<const Vec>& p, const Eigen::Ref<const Vec>& q,
                         double& angle, Vec& dir) {
  const double c = std::clamp(p.dot(q), -1.0, 1.0);
  dir = q - c * p;
  const double s = dir.norm();
  angle = std::atan2(s, c);
  if (s <= 1e-300) {
    if (c < 0.0) throw DomainViolation("antipodal sphere points have no unique geodesic");
    angle = 0.0;
    return false;
  }
  dir /= s;
  return true;
}

}  // namespace detail

inline Point exp_map(const ManifoldModel& M, const Point& p, const TangentVec& X) {
  if (!same_point(p, X.base)) throw BaseMismatch("exp_map: tangent vector not based at p");
  Vec out = p.coords;
  for (int f = 0; f < M.num_factors(); ++f) {
    auto o = factor_block(M, out, f);
    const auto x = factor_block(M, X.v, f);
    if (!M.is_sphere(f)) {
      o += x;
      continue;
    }
    const double theta = x.norm();
    if (theta == 0.0) continue;
    const Vec base = o;
    o = std::cos(theta) * base + (std::sin(theta) / theta) * x;
    o /= o.norm();
  }
  return Point{std::move(out)};
}

/// Per-factor angles (spheres) or Euclidean lengths, all in metric units.
inline double distance(const ManifoldModel& M, const Point& p, const Point& q) {
  double sum = 0.0;
  for (int f = 0; f < M.num_factors(); ++f) {
    const auto a = factor_block(M, p.coords, f);
    const auto b = factor_block(M, q.coords, f);
    if (!M.is_sphere(f)) {
      sum += (b - a).squaredNorm();
    } else {
      const double ang = 2.0 * std::atan2((b - a).norm(), (b + a).norm());
      sum += ang * ang / M.kappa(f);
    }
  }
  return std::sqrt(sum);
}

inline TangentVec log_map(const ManifoldModel& M, const Point& p, const Point& q) {
  Vec v = Vec::Zero(M.ambient_dim());
  double sum = 0.0;
  for (int f = 0; f < M.num_factors(); ++f) {
    auto o = factor_block(M, v, f);
    const auto a = factor_block(M, p.coords, f);
    const auto b = factor_block(M, q.coords, f);
    if (!M.is_sphere(f)) {
      o = b - a;
      sum += o.squaredNorm();
      continue;
    }
    double angle = 0.0;
    Vec dir;
    if (!detail::great_circle(a, b, angle, dir)) continue;
    if (angle > std::numbers::pi - 1e-9)
      throw DomainViolation("log_map: sphere factor points are (nearly) antipodal");
    o = angle * dir;
    sum += angle * angle / M.kappa(f);
  }
  if (std::sqrt(sum) >= M.diameter_bound())
    throw DomainViolation("log_map: distance exceeds pi/sqrt(A)");
  return TangentVec{p, std::move(v)};
}

/// Parallel transport of X from p to q along the minimizing geodesic joining
/// them; per sphere factor a rotation in the plane of the great circle.
inline TangentVec transport(const ManifoldModel& M, const Point& p, const Point& q,
                            const TangentVec& X) {
  if (!same_point(p, X.base)) throw BaseMismatch("transport: vector not based at start point");
  Vec out = X.v;
  for (int f = 0; f < M.num_factors(); ++f) {
    if (!M.is_sphere(f)) continue;
    const auto a = factor_block(M, p.coords, f);
    const auto b = factor_block(M, q.coords, f);
    double angle = 0.0;
    Vec dir;
    if (!detail::great_circle(a, b, angle, dir)) continue;
    auto o = factor_block(M, out, f);
    const double along = o.dot(dir);
    const double normal = o.dot(a);
    const Vec perp = o - along * dir - normal * a;
    o = along * (-std::sin(angle) * a + std::cos(angle) * dir) + normal * b + perp;
  }
  return TangentVec{q, std::move(out)};
}

/// R(X,Y)Z with R(X,Y) = [nabla_X, nabla_Y] - nabla_[X,Y]. Sphere blocks are
/// kappa(<Y,Z>X - <X,Z>Y) in the factor metric, i.e. (Y.Z)X - (X.Z)Y in
/// ambient dot products.
inline TangentVec curvature_op(const ManifoldModel& M, const TangentVec& X, const TangentVec& Y,
                               const TangentVec& Z) {
  require_same_base(X, Y);
  require_same_base(X, Z);
  Vec out = Vec::Zero(M.ambient_dim());
  for (int f = 0; f < M.num_factors(); ++f) {
    if (!M.is_sphere(f)) continue;
    const auto x = factor_block(M, X.v, f);
    const auto y = factor_block(M, Y.v, f);
    const auto z = factor_block(M, Z.v, f);
    factor_block(M, out, f) = y.dot(z) * x - x.dot(z) * y;
  }
  return TangentVec{X.base, std::move(out)};
}

inline double sectional_curvature(const ManifoldModel& M, const TangentVec& X, const TangentVec& Y) {
  const double xx = metric_inner(M, X, X);
  const double yy = metric_inner(M, Y, Y);
  const double xy = metric_inner(M, X, Y);
  const double area2 = xx * yy - xy * xy;
  if (!(area2 > 1e-14 * xx * yy) || xx == 0.0 || yy == 0.0)
    throw DegenerateSpan("sectional_curvature: vectors are linearly dependent");
  return metric_inner(M, curvature_op(M, X, Y, Y), X) / area2;
}

/// Orthonormal basis of T_pM. Sphere blocks come from Gram-Schmidt on the
/// canonical ambient basis, always taking the candidate with the largest
/// residual (lowest index on ties), so the result is deterministic.
inline std::vector<TangentVec> tangent_basis(const ManifoldModel& M, const Point& p) {
  std::vector<TangentVec> basis;
  basis.reserve(M.dim());
  for (int f = 0; f < M.num_factors(); ++f) {
    const int off = M.ambient_offset(f);
    const int sz = M.ambient_size(f);
    if (!M.is_sphere(f)) {
      for (int i = 0; i < sz; ++i) {
        Vec v = Vec::Zero(M.ambient_dim());
        v[off + i] = 1.0;
        basis.push_back(TangentVec{p, std::move(v)});
      }
      continue;
    }
    const Vec base = factor_block(M, p.coords, f);
    std::vector<Vec> accepted{base};
    std::vector<bool> used(sz, false);
    for (int k = 0; k < sz - 1; ++k) {
      int best = -1;
      double best_norm = -1.0;
      Vec best_vec;
      for (int i = 0; i < sz; ++i) {
        if (used[i]) continue;
        Vec c = Vec::Unit(sz, i);
        for (int pass = 0; pass < 2; ++pass)
          for (const auto& a : accepted) c -= c.dot(a) * a;
        const double n = c.norm();
        if (n > best_norm + 1e-12) {
          best_norm = n;
          best = i;
          best_vec = c;
        }
      }
      used[best] = true;
      best_vec /= best_norm;
      accepted.push_back(best_vec);
      Vec v = Vec::Zero(M.ambient_dim());
      v.segment(off, sz) = std::sqrt(M.kappa(f)) * best_vec;
      basis.push_back(TangentVec{p, std::move(v)});
    }
  }
  return basis;
}

/// Components of X in an orthonormal basis.
inline Vec components_in(const ManifoldModel& M, const std::vector<TangentVec>& basis,
                         const TangentVec& X) {
  Vec c(static_cast<Eigen::Index>(basis.size()));
  for (std::size_t i = 0; i < basis.size(); ++i) c[i] = metric_inner(M, X, basis[i]);
  return c;
}

inline TangentVec combine(const ManifoldModel& M, const Point& p, const std::vector<TangentVec>& basis,
                          const Vec& comps) {
  Vec v = Vec::Zero(M.ambient_dim());
  for (std::size_t i = 0; i < basis.size(); ++i) v += comps[i] * basis[i].v;
  return TangentVec{p, std::move(v)};
}

}  // namespace tpc
