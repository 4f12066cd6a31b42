#pragma once

// Uniform chart grids on model domains and the matching second-order
// Laplace-Beltrami stencil.
//
// Polar grids store ring 0 as n_angle duplicate copies of the center; the
// first copy carries the center equation and the rest are tied to it.

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Sparse>

#include "tpc/domain.hpp"

namespace tpc {

using SpMat = Eigen::SparseMatrix<double>;

enum class AxisKind { bounded, periodic, radial };
enum class NodeRole { interior, dirichlet, duplicate };

/// Interval counts per chart axis. n_angle defaults to 2n rounded up to a
/// multiple of four; n_fibre defaults to n.
struct GridSpec {
  int n = 32;
  int n_angle = 0;
  int n_fibre = 0;
};

struct Axis {
  AxisKind kind;
  double lo = 0.0;
  double h = 0.0;
  int n = 0;  // intervals; node count is n + 1 except periodic (n)

  int count() const { return kind == AxisKind::periodic ? n : n + 1; }
  double node(int i) const { return lo + i * h; }
};

/// Four-point Lagrange stencil along one axis.
struct AxisStencil {
  std::array<int, 4> idx{};
  std::array<double, 4> w{};
};

class ChartGrid {
 public:
  ChartGrid(DomainSpec dom, GridSpec spec) : dom_(std::move(dom)), spec_(spec) {
    if (spec_.n < 4) throw ConfigError("grid: n must be at least 4");
    switch (dom_.kind()) {
      case DomainKind::interval: axes_.push_back({AxisKind::bounded, -dom_.half_length(), 2 * dom_.half_length() / spec_.n, spec_.n}); break;
      case DomainKind::rectangle:
        axes_.push_back({AxisKind::bounded, dom_.x0(), (dom_.x1() - dom_.x0()) / spec_.n, spec_.n});
        axes_.push_back({AxisKind::bounded, dom_.y0(), (dom_.y1() - dom_.y0()) / spec_.n, spec_.n});
        break;
      default: {
        int na = spec_.n_angle > 0 ? spec_.n_angle : 4 * ((2 * spec_.n + 3) / 4);
        if (na % 4 != 0 || na < 8) throw ConfigError("grid: n_angle must be a multiple of 4 and at least 8");
        spec_.n_angle = na;
        axes_.push_back({AxisKind::radial, 0.0, dom_.radius() / spec_.n, spec_.n});
        axes_.push_back({AxisKind::periodic, 0.0, 2 * std::numbers::pi / na, na});
        if (dom_.has_fibre()) {
          const int nf = spec_.n_fibre > 0 ? spec_.n_fibre : spec_.n;
          if (nf < 4) throw ConfigError("grid: n_fibre must be at least 4");
          spec_.n_fibre = nf;
          axes_.push_back({AxisKind::bounded, -dom_.half_length(), 2 * dom_.half_length() / nf, nf});
        }
      }
    }
    stride_.fill(0);
    int s = 1;
    for (int a = static_cast<int>(axes_.size()) - 1; a >= 0; --a) {
      stride_[a] = s;
      s *= axes_[a].count();
    }
    size_ = s;
  }

  const DomainSpec& domain() const { return dom_; }
  const GridSpec& spec() const { return spec_; }
  int num_axes() const { return static_cast<int>(axes_.size()); }
  const Axis& axis(int a) const { return axes_[a]; }
  int size() const { return size_; }

  /// Largest step of the non-angular axes.
  double h() const {
    double out = 0.0;
    for (const Axis& ax : axes_)
      if (ax.kind != AxisKind::periodic) out = std::max(out, ax.h);
    return out;
  }

  int index(const std::array<int, 3>& m) const {
    int k = 0;
    for (int a = 0; a < num_axes(); ++a) k += m[a] * stride_[a];
    return k;
  }
  std::array<int, 3> multi(int k) const {
    std::array<int, 3> m{0, 0, 0};
    for (int a = 0; a < num_axes(); ++a) {
      m[a] = k / stride_[a];
      k %= stride_[a];
    }
    return m;
  }
  int stride(int a) const { return stride_[a]; }

  Vec chart(int k) const {
    const auto m = multi(k);
    Vec q(num_axes());
    for (int a = 0; a < num_axes(); ++a) q[a] = axes_[a].node(m[a]);
    return q;
  }
  Point point(int k) const { return dom_.chart_to_point(chart(k)); }

  NodeRole role(int k) const {
    const auto m = multi(k);
    for (int a = 0; a < num_axes(); ++a) {
      const Axis& ax = axes_[a];
      if (ax.kind == AxisKind::bounded && (m[a] == 0 || m[a] == ax.n)) return NodeRole::dirichlet;
      if (ax.kind == AxisKind::radial && m[a] == ax.n) return NodeRole::dirichlet;
    }
    if (dom_.polar() && m[0] == 0 && m[1] != 0) return NodeRole::duplicate;
    return NodeRole::interior;
  }

  /// Index of the center copy that a duplicate node is tied to.
  int center_of(int k) const {
    auto m = multi(k);
    m[1] = 0;
    return index(m);
  }

  /// Node index with radial reflection: ring -i at angle j is ring i at j + n_angle / 2.
  int wrap(std::array<int, 3> m) const {
    if (dom_.polar()) {
      const int na = axes_[1].n;
      if (m[0] < 0) {
        m[0] = -m[0];
        m[1] += na / 2;
      }
      m[1] = ((m[1] % na) + na) % na;
    }
    return index(m);
  }

  /// Discrete Laplace-Beltrami operator; rows of non-interior nodes are empty.
  SpMat laplacian() const {
    std::vector<Eigen::Triplet<double>> T;
    T.reserve(static_cast<std::size_t>(size_) * 7);
    for (int k = 0; k < size_; ++k) {
      if (role(k) != NodeRole::interior) continue;
      const auto m = multi(k);
      auto add = [&](std::array<int, 3> mm, double w) { T.emplace_back(k, wrap(mm), w); };
      auto second = [&](int a, double scale) {
        const double c = scale / (axes_[a].h * axes_[a].h);
        auto lo = m, hi = m;
        --lo[a], ++hi[a];
        add(lo, c), add(hi, c), add(m, -2 * c);
      };
      if (!dom_.polar()) {
        for (int a = 0; a < num_axes(); ++a) second(a, 1.0);
        continue;
      }
      const double hr = axes_[0].h;
      if (m[0] == 0) {
        // 4 (ring mean - center) / h^2
        const int na = axes_[1].n;
        for (int j = 0; j < na; ++j) add({1, j, m[2]}, 4.0 / (na * hr * hr));
        add(m, -4.0 / (hr * hr));
      } else {
        const double r = axes_[0].node(m[0]);
        const double rho = dom_.rho(r), ratio = dom_.drho(r) / rho;
        auto lo = m, hi = m;
        --lo[0], ++hi[0];
        add(lo, 1.0 / (hr * hr) - ratio / (2 * hr));
        add(hi, 1.0 / (hr * hr) + ratio / (2 * hr));
        add(m, -2.0 / (hr * hr));
        second(1, 1.0 / (rho * rho));
      }
      if (dom_.has_fibre()) second(2, 1.0);
    }
    SpMat L(size_, size_);
    L.setFromTriplets(T.begin(), T.end());
    return L;
  }

  /// Lagrange stencils for a chart point; nodes may need wrap().
  std::array<AxisStencil, 3> stencils(const Vec& q) const {
    std::array<AxisStencil, 3> out{};
    for (int a = 0; a < num_axes(); ++a) {
      const Axis& ax = axes_[a];
      const double x = (q[a] - ax.lo) / ax.h;
      int i0 = static_cast<int>(std::floor(x)) - 1;
      if (ax.kind == AxisKind::bounded) i0 = std::clamp(i0, 0, ax.n - 3);
      if (ax.kind == AxisKind::radial) i0 = std::min(i0, ax.n - 3);
      const double s = x - i0;
      for (int l = 0; l < 4; ++l) {
        double w = 1.0;
        for (int m = 0; m < 4; ++m)
          if (m != l) w *= (s - m) / (l - m);
        out[a].idx[l] = i0 + l;
        out[a].w[l] = w;
      }
    }
    for (int a = num_axes(); a < 3; ++a) {
      out[a].idx = {0, 0, 0, 0};
      out[a].w = {1.0, 0.0, 0.0, 0.0};
    }
    return out;
  }

  bool operator==(const ChartGrid& o) const {
    return dom_ == o.dom_ && spec_.n == o.spec_.n && spec_.n_angle == o.spec_.n_angle &&
           spec_.n_fibre == o.spec_.n_fibre;
  }

 private:
  DomainSpec dom_;
  GridSpec spec_;
  std::vector<Axis> axes_;
  std::array<int, 3> stride_{};
  int size_ = 0;
};

}  // namespace tpc
