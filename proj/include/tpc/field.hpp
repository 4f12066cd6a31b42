#pragma once

// Scalar fields on model domains with covariant gradient and Hessian.
//
// Derivatives are returned in the domain's smooth orthonormal frame. Grid
// fields difference nodal values with the same stencils as the solvers and
// interpolate the resulting nodal jets with tensor cubic Lagrange weights.

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tpc/grid.hpp"
#include "tpc/semilinear.hpp"

namespace tpc {

/// Value, gradient and Hessian components in an orthonormal frame at a point.
struct Jet {
  double value = 0.0;
  std::vector<TangentVec> frame;
  Vec grad;
  Mat hess;
};

/// Where a field came from; consumed by the chain audit.
struct Provenance {
  std::string equation = "sampled";
  std::optional<SemilinearSpec> b;  // set when the field solves -Lap u = b
  bool growth_condition = false;    // boundary blow-down replaces the boundary inequality
  double trust_collar = 0.0;        // claims hold only at boundary distance > collar
};

class Field {
 public:
  virtual ~Field() = default;
  virtual const DomainSpec& domain() const = 0;
  virtual double value(const Point& p) const = 0;
  virtual Jet jet(const Point& p) const = 0;
  /// Grid spacing, or 0 for fields without a grid.
  virtual double resolution() const { return 0.0; }
  virtual const Provenance& provenance() const { return prov_; }
  void set_provenance(Provenance p) { prov_ = std::move(p); }

 protected:
  Provenance prov_;
};

class ScalarField final : public Field {
 public:
  ScalarField(ChartGrid grid, Vec values, Provenance prov = {}) : grid_(std::move(grid)), u_(std::move(values)) {
    if (u_.size() != grid_.size()) throw GridMismatch("field values do not match the grid");
    prov_ = std::move(prov);
    M_ = grid_.domain().manifold();
    compute_jets();
  }

  static ScalarField sample(const ChartGrid& grid, const std::function<double(const Point&)>& f, Provenance prov = {}) {
    Vec u(grid.size());
    for (int k = 0; k < grid.size(); ++k) u[k] = f(grid.point(k));
    return ScalarField(grid, std::move(u), std::move(prov));
  }

  const DomainSpec& domain() const override { return grid_.domain(); }
  const ChartGrid& grid() const { return grid_; }
  const Vec& values() const { return u_; }
  double resolution() const override { return grid_.h(); }
  int dim() const { return dim_; }

  /// Nodal jet row: value, gradient (dim), Hessian (dim x dim, row-major).
  const Mat& nodal_jets() const { return jets_; }

  double value(const Point& p) const override { return interpolate(p, 1)[0]; }

  Jet jet(const Point& p) const override {
    const Vec row = interpolate(p, static_cast<int>(jets_.cols()));
    Jet J;
    J.value = row[0];
    J.frame = domain().frame(p);
    J.grad = row.segment(1, dim_);
    J.hess = Eigen::Map<const Mat>(row.data() + 1 + dim_, dim_, dim_);
    J.hess = 0.5 * (J.hess + J.hess.transpose()).eval();
    return J;
  }

 private:
  Vec interpolate(const Point& p, int ncols) const {
    if (!domain().contains(p, 1e-9 * std::max(1.0, domain().diameter())))
      throw DomainViolation("field query outside the domain");
    const Vec q = domain().point_to_chart(p);
    const auto st = grid_.stencils(q);
    const int na = grid_.num_axes();
    Vec out = Vec::Zero(ncols);
    for (int l0 = 0; l0 < 4; ++l0)
      for (int l1 = 0; l1 < (na > 1 ? 4 : 1); ++l1)
        for (int l2 = 0; l2 < (na > 2 ? 4 : 1); ++l2) {
          const double w = st[0].w[l0] * st[1].w[l1] * st[2].w[l2];
          const int k = grid_.wrap({st[0].idx[l0], st[1].idx[l1], st[2].idx[l2]});
          out += w * jets_.row(k).head(ncols).transpose();
        }
    return out;
  }

  // First and second differences along a bounded or radial axis; one-sided
  // second-order formulas at the outer ends.
  double d1(const Vec& f, const std::array<int, 3>& m, int a) const {
    const Axis& ax = grid_.axis(a);
    const int s = grid_.stride(a), k = grid_.index(m), i = m[a];
    if (i > 0 && i < ax.n) return (f[k + s] - f[k - s]) / (2 * ax.h);
    if (i == 0) return (-3 * f[k] + 4 * f[k + s] - f[k + 2 * s]) / (2 * ax.h);
    return (3 * f[k] - 4 * f[k - s] + f[k - 2 * s]) / (2 * ax.h);
  }
  double d2(const Vec& f, const std::array<int, 3>& m, int a) const {
    const Axis& ax = grid_.axis(a);
    const int s = grid_.stride(a), k = grid_.index(m), i = m[a];
    const double h2 = ax.h * ax.h;
    if (i > 0 && i < ax.n) return (f[k + s] - 2 * f[k] + f[k - s]) / h2;
    if (i == 0) return (2 * f[k] - 5 * f[k + s] + 4 * f[k + 2 * s] - f[k + 3 * s]) / h2;
    return (2 * f[k] - 5 * f[k - s] + 4 * f[k - 2 * s] - f[k - 3 * s]) / h2;
  }
  double p1(const Vec& f, std::array<int, 3> m) const {
    const Axis& ax = grid_.axis(1);
    auto lo = m, hi = m;
    --lo[1], ++hi[1];
    return (f[grid_.wrap(hi)] - f[grid_.wrap(lo)]) / (2 * ax.h);
  }
  double p2(const Vec& f, std::array<int, 3> m) const {
    const Axis& ax = grid_.axis(1);
    auto lo = m, hi = m;
    --lo[1], ++hi[1];
    return (f[grid_.wrap(hi)] - 2 * f[grid_.index(m)] + f[grid_.wrap(lo)]) / (ax.h * ax.h);
  }

  void compute_jets() {
    dim_ = M_.dim();
    const int N = grid_.size();
    const int cols = 1 + dim_ + dim_ * dim_;
    jets_ = Mat::Zero(N, cols);
    jets_.col(0) = u_;
    auto set_h = [&](int k, int i, int j, double v) {
      jets_(k, 1 + dim_ + i * dim_ + j) = v;
      jets_(k, 1 + dim_ + j * dim_ + i) = v;
    };
    const DomainSpec& D = domain();
    if (!D.polar()) {
      std::vector<Vec> g(dim_, Vec(N));
      for (int k = 0; k < N; ++k) {
        const auto m = grid_.multi(k);
        for (int a = 0; a < dim_; ++a) {
          g[a][k] = d1(u_, m, a);
          jets_(k, 1 + a) = g[a][k];
          set_h(k, a, a, d2(u_, m, a));
        }
      }
      if (dim_ == 2)
        for (int k = 0; k < N; ++k) set_h(k, 0, 1, d1(g[0], grid_.multi(k), 1));
      return;
    }

    // Polar part in the smooth frame, slice by slice.
    const int nr = grid_.axis(0).n, na = grid_.axis(1).n;
    const double hr = grid_.axis(0).h;
    Vec ut(N);
    for (int k = 0; k < N; ++k) ut[k] = grid_.multi(k)[0] == 0 ? 0.0 : p1(u_, grid_.multi(k));
    Vec gF1(N), gF2(N);
    for (int k = 0; k < N; ++k) {
      const auto m = grid_.multi(k);
      double g1, g2, h11, h12, h22;
      if (m[0] == 0) {
        // Fourier fit on the first ring.
        double mean = 0, a1 = 0, b1 = 0, a2 = 0, b2 = 0;
        for (int j = 0; j < na; ++j) {
          const double th = grid_.axis(1).node(j), v = u_[grid_.index({1, j, m[2]})];
          mean += v / na;
          a1 += 2 * v * std::cos(th) / na, b1 += 2 * v * std::sin(th) / na;
          a2 += 2 * v * std::cos(2 * th) / na, b2 += 2 * v * std::sin(2 * th) / na;
        }
        const double u0 = u_[grid_.center_of(k)];
        const double tr = 4 * (mean - u0) / (hr * hr), diff = 4 * a2 / (hr * hr);
        g1 = a1 / hr, g2 = b1 / hr;
        h11 = 0.5 * (tr + diff), h22 = 0.5 * (tr - diff), h12 = 2 * b2 / (hr * hr);
      } else {
        const double r = grid_.axis(0).node(m[0]), th = grid_.axis(1).node(m[1]);
        const double rho = D.rho(r), drho = D.drho(r);
        const double ur = d1(u_, m, 0), urr = d2(u_, m, 0), uth = ut[k], utt = p2(u_, m);
        double urt;
        if (m[0] < nr) {
          auto lo = m, hi = m;
          --lo[0], ++hi[0];
          urt = (ut[grid_.index(hi)] - ut[grid_.index(lo)]) / (2 * hr);
        } else {
          urt = d1(ut, m, 0);
        }
        Eigen::Matrix2d Hh;
        Hh(0, 0) = urr;
        Hh(0, 1) = Hh(1, 0) = (urt - drho / rho * uth) / rho;
        Hh(1, 1) = (utt + rho * drho * ur) / (rho * rho);
        Eigen::Vector2d gh(ur, uth / rho);
        Eigen::Matrix2d Q;
        Q << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
        const Eigen::Vector2d gF = Q * gh;
        const Eigen::Matrix2d HF = Q * Hh * Q.transpose();
        g1 = gF[0], g2 = gF[1], h11 = HF(0, 0), h12 = HF(0, 1), h22 = HF(1, 1);
      }
      gF1[k] = g1, gF2[k] = g2;
      jets_(k, 1) = g1, jets_(k, 2) = g2;
      set_h(k, 0, 0, h11), set_h(k, 0, 1, h12), set_h(k, 1, 1, h22);
    }
    if (!D.has_fibre()) return;
    for (int k = 0; k < N; ++k) {
      const auto m = grid_.multi(k);
      jets_(k, 3) = d1(u_, m, 2);
      set_h(k, 2, 2, d2(u_, m, 2));
      set_h(k, 0, 2, d1(gF1, m, 2));
      set_h(k, 1, 2, d1(gF2, m, 2));
    }
  }

  ChartGrid grid_;
  Vec u_;
  ManifoldModel M_ = ManifoldModel({Euclidean{1}});
  int dim_ = 0;
  Mat jets_;
};

/// Field given by a closed-form function; jets by Richardson-extrapolated
/// second differences along geodesics.
class AnalyticField final : public Field {
 public:
  AnalyticField(DomainSpec dom, std::function<double(const Point&)> f, double step = 1e-3, Provenance prov = {})
      : dom_(std::move(dom)), M_(dom_.manifold()), f_(std::move(f)), step_(step) {
    prov_ = std::move(prov);
  }

  const DomainSpec& domain() const override { return dom_; }
  double value(const Point& p) const override { return f_(p); }

  Jet jet(const Point& p) const override {
    Jet J;
    J.value = f_(p);
    J.frame = dom_.frame(p);
    const int n = static_cast<int>(J.frame.size());
    J.grad = Vec(n);
    J.hess = Mat(n, n);
    for (int i = 0; i < n; ++i) {
      J.grad[i] = rich([&](double h) { return first(p, J.frame[i].v, h); });
      J.hess(i, i) = rich([&](double h) { return second(p, J.frame[i].v, J.value, h); });
    }
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const Vec plus = (J.frame[i].v + J.frame[j].v) / std::sqrt(2.0);
        const Vec minus = (J.frame[i].v - J.frame[j].v) / std::sqrt(2.0);
        const double hp = rich([&](double h) { return second(p, plus, J.value, h); });
        const double hm = rich([&](double h) { return second(p, minus, J.value, h); });
        J.hess(i, j) = J.hess(j, i) = 0.5 * (hp - hm);
      }
    return J;
  }

 private:
  template <class F>
  double rich(F&& f) const {
    return (4 * f(0.5 * step_) - f(step_)) / 3;
  }
  double along(const Point& p, const Vec& dir, double s) const { return f_(exp_map(M_, p, TangentVec{p, s * dir})); }
  double first(const Point& p, const Vec& dir, double h) const {
    return (along(p, dir, h) - along(p, dir, -h)) / (2 * h);
  }
  double second(const Point& p, const Vec& dir, double f0, double h) const {
    return (along(p, dir, h) - 2 * f0 + along(p, dir, -h)) / (h * h);
  }

  DomainSpec dom_;
  ManifoldModel M_;
  std::function<double(const Point&)> f_;
  double step_;
};

/// sign * log(u) with derivatives by the chain rule.
class LogTransformedField final : public Field {
 public:
  LogTransformedField(std::shared_ptr<const Field> base, int sign) : base_(std::move(base)), sign_(sign) {
    if (sign_ != 1 && sign_ != -1) throw ConfigError("log transform sign must be +1 or -1");
    if (const auto* s = dynamic_cast<const ScalarField*>(base_.get()); s && !(s->values().minCoeff() > 0.0))
      throw DomainViolation("log transform of a nonpositive field");
    prov_ = base_->provenance();
  }

  const DomainSpec& domain() const override { return base_->domain(); }
  double resolution() const override { return base_->resolution(); }
  const Field& base() const { return *base_; }
  int sign() const { return sign_; }

  double value(const Point& p) const override { return sign_ * std::log(positive(base_->value(p))); }

  Jet jet(const Point& p) const override {
    Jet J = base_->jet(p);
    const double u = positive(J.value);
    const Vec g = J.grad / u;
    J.hess = sign_ * (J.hess / u - g * g.transpose());
    J.grad = sign_ * g;
    J.value = sign_ * std::log(u);
    return J;
  }

 private:
  static double positive(double u) {
    if (!(u > 0.0)) throw DomainViolation("log transform of a nonpositive value");
    return u;
  }

  std::shared_ptr<const Field> base_;
  int sign_;
};

/// Snapshots at strictly increasing times.
class TimeSeriesField {
 public:
  void push(double t, std::shared_ptr<const Field> f) {
    if (!times_.empty() && !(t > times_.back())) throw InvariantViolation("snapshot times must increase strictly");
    if (!fields_.empty() && !(f->domain() == fields_.front()->domain()))
      throw GridMismatch("snapshots must share one domain");
    const auto* a = dynamic_cast<const ScalarField*>(f.get());
    const auto* b = fields_.empty() ? nullptr : dynamic_cast<const ScalarField*>(fields_.front().get());
    if (a && b && !(a->grid() == b->grid())) throw GridMismatch("snapshots must share one grid");
    times_.push_back(t);
    fields_.push_back(std::move(f));
  }

  std::size_t size() const { return times_.size(); }
  double time(std::size_t i) const { return times_[i]; }
  const Field& at(std::size_t i) const { return *fields_[i]; }
  std::shared_ptr<const Field> ptr(std::size_t i) const { return fields_[i]; }
  const std::vector<double>& times() const { return times_; }

 private:
  std::vector<double> times_;
  std::vector<std::shared_ptr<const Field>> fields_;
};

// Pointwise differential operators.

inline TangentVec covariant_gradient(const Field& f, const Point& p) {
  const Jet J = f.jet(p);
  return combine(f.domain().manifold(), p, J.frame, J.grad);
}

/// Hessian components in the domain frame at an interior point.
inline Mat covariant_hessian(const Field& f, const Point& p) {
  if (!(f.domain().dist_to_boundary(p) > 0.0)) throw DomainViolation("Hessian requested on or outside the boundary");
  return f.jet(p).hess;
}

inline double laplace_beltrami(const Field& f, const Point& p) { return covariant_hessian(f, p).trace(); }

/// Second difference of u along the geodesic from x to y, centered at its midpoint.
inline double geodesic_second_difference(const Field& f, const Point& x, const Point& y, double h) {
  const auto seg = connect(f.domain().manifold(), x, y);
  return (f.value(seg.at(h)) - 2 * f.value(seg.at(0.0)) + f.value(seg.at(-h))) / (h * h);
}

// Exports.

inline std::vector<std::string> chart_names(const DomainSpec& d) {
  switch (d.kind()) {
    case DomainKind::interval: return {"x"};
    case DomainKind::rectangle: return {"x", "y"};
    case DomainKind::product: return {"r", "theta", "s"};
    default: return {"r", "theta"};
  }
}

inline void write_field_csv(std::ostream& os, const ScalarField& f) {
  const auto names = chart_names(f.domain());
  for (const auto& n : names) os << n << ",";
  os << "value\n";
  os.precision(17);
  for (int k = 0; k < f.grid().size(); ++k) {
    const Vec q = f.grid().chart(k);
    for (Eigen::Index a = 0; a < q.size(); ++a) os << q[a] << ",";
    os << f.values()[k] << "\n";
  }
}

inline nlohmann::json field_header_json(const ScalarField& f) {
  nlohmann::json j;
  j["domain"] = f.domain().describe();
  j["manifold"] = f.domain().manifold().describe();
  j["metric"] = f.domain().spherical() ? "round" : "flat";
  j["chart"] = chart_names(f.domain());
  std::vector<int> shape;
  for (int a = 0; a < f.grid().num_axes(); ++a) shape.push_back(f.grid().axis(a).count());
  j["shape"] = shape;
  j["equation"] = f.provenance().equation;
  return j;
}

}  // namespace tpc
