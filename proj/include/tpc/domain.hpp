#pragma once

// Geodesically convex model domains with a global chart: interval, rectangle,
// flat disk, spherical cap centered at the north pole, and (disk | cap) x interval.
//
// Chart coordinates: interval (x); rectangle (x, y); disk and cap (r, theta)
// with r the geodesic distance to the center; products (r, theta, s).

#include <array>
#include <charconv>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tpc/errors.hpp"
#include "tpc/geometry.hpp"

namespace tpc {

enum class DomainKind { interval, rectangle, disk, cap, product };

inline std::string to_string(DomainKind k) {
  switch (k) {
    case DomainKind::interval: return "interval";
    case DomainKind::rectangle: return "rectangle";
    case DomainKind::disk: return "disk";
    case DomainKind::cap: return "cap";
    case DomainKind::product: return "product";
  }
  return "?";
}

class DomainSpec {
 public:
  static DomainSpec interval(double L) {
    DomainSpec d(DomainKind::interval);
    d.L_ = L;
    return d.validated();
  }
  static DomainSpec rectangle(double x0, double x1, double y0, double y1) {
    DomainSpec d(DomainKind::rectangle);
    d.x0_ = x0, d.x1_ = x1, d.y0_ = y0, d.y1_ = y1;
    return d.validated();
  }
  static DomainSpec disk(double R, double theta_offset = 0.0) {
    DomainSpec d(DomainKind::disk);
    d.radius_ = R, d.offset_ = theta_offset;
    return d.validated();
  }
  static DomainSpec cap(double r0, double kappa, double theta_offset = 0.0) {
    DomainSpec d(DomainKind::cap);
    d.radius_ = r0, d.kappa_ = kappa, d.offset_ = theta_offset;
    return d.validated();
  }
  /// base must be a disk or a cap; the fibre is [-L, L].
  static DomainSpec product(const DomainSpec& base, double L) {
    if (base.kind_ != DomainKind::disk && base.kind_ != DomainKind::cap)
      throw ConfigError("product domains take a disk or cap base");
    DomainSpec d = base;
    d.kind_ = DomainKind::product;
    d.base_ = base.kind_;
    d.L_ = L;
    return d.validated();
  }

  DomainKind kind() const { return kind_; }
  DomainKind base_kind() const { return base_; }
  double half_length() const { return L_; }
  double radius() const { return radius_; }
  double kappa() const { return kappa_; }
  double theta_offset() const { return offset_; }
  double x0() const { return x0_; }
  double x1() const { return x1_; }
  double y0() const { return y0_; }
  double y1() const { return y1_; }

  bool polar() const { return kind_ == DomainKind::disk || kind_ == DomainKind::cap || kind_ == DomainKind::product; }
  bool spherical() const { return kind_ == DomainKind::cap || (kind_ == DomainKind::product && base_ == DomainKind::cap); }
  bool has_fibre() const { return kind_ == DomainKind::product; }

  int chart_dim() const {
    switch (kind_) {
      case DomainKind::interval: return 1;
      case DomainKind::product: return 3;
      default: return 2;
    }
  }

  ManifoldModel manifold() const {
    switch (kind_) {
      case DomainKind::interval: return ManifoldModel({Euclidean{1}});
      case DomainKind::rectangle:
      case DomainKind::disk: return ManifoldModel({Euclidean{2}});
      case DomainKind::cap: return ManifoldModel({Sphere{2, kappa_}});
      case DomainKind::product:
        return spherical() ? ManifoldModel({Sphere{2, kappa_}, Euclidean{1}})
                           : ManifoldModel({Euclidean{2}, Euclidean{1}});
    }
    return ManifoldModel({Euclidean{1}});
  }

  /// Circumference radius rho(r) of the geodesic circle and its derivative.
  double rho(double r) const {
    if (!spherical()) return r;
    const double k = std::sqrt(kappa_);
    return std::sin(k * r) / k;
  }
  double drho(double r) const { return spherical() ? std::cos(std::sqrt(kappa_) * r) : 1.0; }

  double diameter() const {
    switch (kind_) {
      case DomainKind::interval: return 2 * L_;
      case DomainKind::rectangle: return std::hypot(x1_ - x0_, y1_ - y0_);
      case DomainKind::disk:
      case DomainKind::cap: return 2 * radius_;
      case DomainKind::product: return std::hypot(2 * radius_, 2 * L_);
    }
    return 0.0;
  }

  Point chart_to_point(const Vec& q) const {
    Vec c(manifold().ambient_dim());
    switch (kind_) {
      case DomainKind::interval: c << q[0]; break;
      case DomainKind::rectangle: c << q[0], q[1]; break;
      default: {
        const double th = q[1] + offset_;
        if (spherical()) {
          const double a = std::sqrt(kappa_) * q[0];
          c.head(3) << std::sin(a) * std::cos(th), std::sin(a) * std::sin(th), std::cos(a);
        } else {
          c.head(2) << q[0] * std::cos(th), q[0] * std::sin(th);
        }
        if (has_fibre()) c[c.size() - 1] = q[2];
      }
    }
    return Point{std::move(c)};
  }

  /// Chart coordinates with theta in [0, 2 pi); theta = 0 at the center.
  Vec point_to_chart(const Point& p) const {
    const Vec& c = p.coords;
    Vec q(chart_dim());
    switch (kind_) {
      case DomainKind::interval: q << c[0]; break;
      case DomainKind::rectangle: q << c[0], c[1]; break;
      default: {
        double r, th;
        if (spherical()) {
          const double planar = std::hypot(c[0], c[1]);
          r = std::atan2(planar, c[2]) / std::sqrt(kappa_);
          th = planar > 0 ? std::atan2(c[1], c[0]) : offset_;
        } else {
          r = std::hypot(c[0], c[1]);
          th = r > 0 ? std::atan2(c[1], c[0]) : offset_;
        }
        th -= offset_;
        th = std::fmod(th, 2 * std::numbers::pi);
        if (th < 0) th += 2 * std::numbers::pi;
        q[0] = r, q[1] = th;
        if (has_fibre()) q[2] = c[c.size() - 1];
      }
    }
    return q;
  }

  /// Signed distance to the boundary, positive inside.
  double dist_to_boundary(const Point& p) const {
    const Vec q = point_to_chart(p);
    switch (kind_) {
      case DomainKind::interval: return L_ - std::abs(q[0]);
      case DomainKind::rectangle: return std::min({q[0] - x0_, x1_ - q[0], q[1] - y0_, y1_ - q[1]});
      case DomainKind::disk:
      case DomainKind::cap: return radius_ - q[0];
      case DomainKind::product: return std::min(radius_ - q[0], L_ - std::abs(q[2]));
    }
    return 0.0;
  }

  bool contains(const Point& p, double tol = 1e-12) const { return dist_to_boundary(p) >= -tol; }

  /// Orthonormal frame that is smooth across the polar center: the radial
  /// parallel transport of the chart axes at the center.
  std::vector<TangentVec> frame(const Point& p) const {
    const ManifoldModel M = manifold();
    const int n = M.dim(), amb = M.ambient_dim();
    std::vector<TangentVec> F;
    if (!polar()) {
      for (int i = 0; i < n; ++i) F.push_back(TangentVec{p, Vec::Unit(amb, i)});
      return F;
    }
    const Vec q = point_to_chart(p);
    const double th = q[1], phys = th + offset_;
    Vec er = Vec::Zero(amb), et = Vec::Zero(amb);
    if (spherical()) {
      const double k = std::sqrt(kappa_), a = k * q[0];
      er.head(3) << k * std::cos(a) * std::cos(phys), k * std::cos(a) * std::sin(phys), -k * std::sin(a);
      et.head(3) << -k * std::sin(phys), k * std::cos(phys), 0.0;
    } else {
      er.head(2) << std::cos(phys), std::sin(phys);
      et.head(2) << -std::sin(phys), std::cos(phys);
    }
    const double c = std::cos(th), s = std::sin(th);
    F.push_back(TangentVec{p, c * er - s * et});
    F.push_back(TangentVec{p, s * er + c * et});
    if (has_fibre()) F.push_back(TangentVec{p, Vec::Unit(amb, amb - 1)});
    return F;
  }

  /// Area (volume) uniform sample of the closed domain.
  template <class Rng>
  Point sample(Rng& rng) const {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    return sample_from_unit(Vec::NullaryExpr(chart_dim(), [&](Eigen::Index) { return U(rng); }));
  }

  /// Maps a point of the unit cube to the domain, uniform in volume.
  Point sample_from_unit(const Vec& w) const {
    Vec q(chart_dim());
    switch (kind_) {
      case DomainKind::interval: q << -L_ + 2 * L_ * w[0]; break;
      case DomainKind::rectangle: q << x0_ + (x1_ - x0_) * w[0], y0_ + (y1_ - y0_) * w[1]; break;
      default: {
        if (spherical()) {
          const double k = std::sqrt(kappa_);
          q[0] = std::acos(1.0 - w[0] * (1.0 - std::cos(k * radius_))) / k;
        } else {
          q[0] = radius_ * std::sqrt(w[0]);
        }
        q[1] = 2 * std::numbers::pi * w[1];
        if (has_fibre()) q[2] = -L_ + 2 * L_ * w[2];
      }
    }
    return chart_to_point(q);
  }

  template <class Rng>
  Point sample_boundary(Rng& rng) const {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    Vec q(chart_dim());
    switch (kind_) {
      case DomainKind::interval: q << (U(rng) < 0.5 ? -L_ : L_); break;
      case DomainKind::rectangle: {
        const double w = x1_ - x0_, h = y1_ - y0_;
        double s = U(rng) * 2 * (w + h);
        if (s < w) q << x0_ + s, y0_;
        else if ((s -= w) < h) q << x1_, y0_ + s;
        else if ((s -= h) < w) q << x1_ - s, y1_;
        else q << x0_, y1_ - (s - w);
        break;
      }
      case DomainKind::disk:
      case DomainKind::cap: q << radius_, 2 * std::numbers::pi * U(rng); break;
      case DomainKind::product: {
        const double side = 2 * std::numbers::pi * rho(radius_) * 2 * L_;
        const double caps = 2 * area(radius_);
        if (U(rng) * (side + caps) < side) {
          q << radius_, 2 * std::numbers::pi * U(rng), -L_ + 2 * L_ * U(rng);
        } else {
          Vec w(3);
          w << U(rng), U(rng), 0.0;
          q = point_to_chart(sample_from_unit(w));
          q[2] = U(rng) < 0.5 ? -L_ : L_;
        }
      }
    }
    return chart_to_point(q);
  }

  /// Sampled certificate: midpoints of random boundary-pair geodesics stay in
  /// the closure and the diameter is below the conjugate-point bound.
  bool certify_convexity(int n_pairs = 200, std::uint64_t seed = 7) const;

  /// Concentric inner domain at boundary distance delta.
  DomainSpec shrink(double delta) const {
    switch (kind_) {
      case DomainKind::interval: return interval(L_ - delta);
      case DomainKind::rectangle: return rectangle(x0_ + delta, x1_ - delta, y0_ + delta, y1_ - delta);
      case DomainKind::disk: return disk(radius_ - delta, offset_);
      case DomainKind::cap: return cap(radius_ - delta, kappa_, offset_);
      case DomainKind::product: {
        const DomainSpec b = base_ == DomainKind::disk ? disk(radius_ - delta, offset_) : cap(radius_ - delta, kappa_, offset_);
        return product(b, L_ - delta);
      }
    }
    return *this;
  }

  std::string describe() const {
    auto f = [](double v) {
      std::array<char, 32> buf{};
      const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), v);
      return std::string(buf.data(), r.ptr);
    };
    std::string base = (base_ == DomainKind::cap || kind_ == DomainKind::cap)
                           ? "cap(r0=" + f(radius_) + ",kappa=" + f(kappa_) + ")"
                           : "disk(R=" + f(radius_) + ")";
    switch (kind_) {
      case DomainKind::interval: return "interval(L=" + f(L_) + ")";
      case DomainKind::rectangle: return "rectangle([" + f(x0_) + "," + f(x1_) + "]x[" + f(y0_) + "," + f(y1_) + "])";
      case DomainKind::disk:
      case DomainKind::cap: return base;
      case DomainKind::product: return base + "xinterval(L=" + f(L_) + ")";
    }
    return "?";
  }

  bool operator==(const DomainSpec&) const = default;

 private:
  explicit DomainSpec(DomainKind k) : kind_(k) {}

  double area(double r) const {
    if (!spherical()) return std::numbers::pi * r * r;
    return 2 * std::numbers::pi * (1 - std::cos(std::sqrt(kappa_) * r)) / kappa_;
  }

  DomainSpec validated() const {
    auto positive = [](double v, const char* what) {
      if (!(v > 0) || !std::isfinite(v)) throw ConfigError(std::string("domain: ") + what + " must be positive");
    };
    switch (kind_) {
      case DomainKind::interval: positive(L_, "half-length"); break;
      case DomainKind::rectangle: positive(x1_ - x0_, "width"), positive(y1_ - y0_, "height"); break;
      case DomainKind::disk: positive(radius_, "radius"); break;
      case DomainKind::cap:
        positive(radius_, "radius");
        positive(kappa_, "curvature");
        break;
      case DomainKind::product:
        positive(radius_, "radius");
        positive(L_, "half-length");
        break;
    }
    if (spherical() && radius_ >= std::numbers::pi / (2 * std::sqrt(kappa_)))
      throw DomainViolation("cap radius must be below pi / (2 sqrt(kappa))");
    if (!(diameter() < manifold().diameter_bound())) throw DomainViolation("domain diameter exceeds pi / sqrt(A)");
    return *this;
  }

  DomainKind kind_;
  DomainKind base_ = DomainKind::disk;
  double L_ = 1.0;
  double x0_ = -1.0, x1_ = 1.0, y0_ = -1.0, y1_ = 1.0;
  double radius_ = 1.0;
  double kappa_ = 1.0;
  double offset_ = 0.0;
};

}  // namespace tpc

#include "tpc/geodesic.hpp"

namespace tpc {

inline bool DomainSpec::certify_convexity(int n_pairs, std::uint64_t seed) const {
  if (!(diameter() < manifold().diameter_bound())) return false;
  const ManifoldModel M = manifold();
  std::mt19937_64 rng(seed);
  const double tol = 1e-9 * std::max(1.0, diameter());
  for (int i = 0; i < n_pairs; ++i) {
    const Point x = sample_boundary(rng), y = sample_boundary(rng);
    if (same_point(x, y, 1e-14)) continue;
    if (!contains(connect(M, x, y).at(0.0), tol)) return false;
  }
  return true;
}

}  // namespace tpc
