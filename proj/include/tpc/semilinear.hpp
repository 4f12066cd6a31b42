#pragma once

// Registry of right-hand sides b(x, u, |grad u|) with monotonicity and
// concavity metadata, plus sampled checks of that metadata.

#include <cmath>
#include <random>
#include <string>

#include "tpc/errors.hpp"
#include "tpc/geodesic.hpp"
#include "tpc/isotropic.hpp"

namespace tpc {

enum class BKind { constant, liouville, power_log, gradient_coupled, linear };

struct SemilinearSpec {
  BKind kind = BKind::constant;
  double c = 1.0;      // constant value, or liouville amplitude
  double d = 1.0;      // liouville rate
  double p = 1.0;      // power_log exponent
  double slope = 0.0;  // linear coefficient

  static SemilinearSpec constant(double value) { return {BKind::constant, value}; }
  static SemilinearSpec liouville(double c, double d) { return {BKind::liouville, c, d}; }
  static SemilinearSpec power_log(double p) { return {BKind::power_log, 1.0, 1.0, p}; }
  static SemilinearSpec gradient_coupled() { return {BKind::gradient_coupled}; }
  static SemilinearSpec linear(double s) { return {BKind::linear, 1.0, 1.0, 1.0, s}; }

  std::string name() const {
    switch (kind) {
      case BKind::constant: return "constant";
      case BKind::liouville: return "liouville";
      case BKind::power_log: return "power_log";
      case BKind::gradient_coupled: return "gradient_coupled";
      case BKind::linear: return "linear";
    }
    return "?";
  }

  /// b(x, u, g) with g = |grad u|.
  double operator()(const Point& /*x*/, double u, double g) const {
    switch (kind) {
      case BKind::constant: return c;
      case BKind::liouville: return c * std::exp(-d * u);
      case BKind::power_log: return -std::exp(u * (1.0 - p));
      case BKind::gradient_coupled: return -g * g;
      case BKind::linear: return slope * u;
    }
    return 0.0;
  }

  double du(const Point& /*x*/, double u, double /*g*/) const {
    switch (kind) {
      case BKind::constant: return 0.0;
      case BKind::liouville: return -c * d * std::exp(-d * u);
      case BKind::power_log: return -(1.0 - p) * std::exp(u * (1.0 - p));
      case BKind::gradient_coupled: return 0.0;
      case BKind::linear: return slope;
    }
    return 0.0;
  }

  double dg(const Point& /*x*/, double /*u*/, double g) const {
    return kind == BKind::gradient_coupled ? -2.0 * g : 0.0;
  }

  // Metadata.
  bool strictly_decreasing() const {
    switch (kind) {
      case BKind::constant: return false;
      case BKind::liouville: return c > 0 && d > 0;
      case BKind::power_log: return p < 1.0;
      case BKind::gradient_coupled: return false;
      case BKind::linear: return slope < 0;
    }
    return false;
  }
  bool nonincreasing() const {
    switch (kind) {
      case BKind::liouville: return c * d >= 0;
      case BKind::power_log: return p <= 1.0;
      case BKind::linear: return slope <= 0;
      default: return true;
    }
  }
  bool nonincreasing_in_gradient() const { return true; }
  bool jointly_concave() const {
    switch (kind) {
      case BKind::liouville: return c * d * d <= 0;
      default: return true;
    }
  }
  /// Pipelines relying on blow-down at the boundary instead of the boundary inequality.
  bool growth_condition() const { return kind == BKind::liouville || kind == BKind::power_log; }

  bool operator==(const SemilinearSpec&) const = default;
};

struct BPropertyReport : PropertyReport {
  bool strict = false;               // sampled strict decrease in u
  bool metadata_consistent = true;   // sampled flags agree with the registry
};

/// Sampled slot checks. Joint concavity in (x, u) uses geodesic midpoints on a
/// unit sphere so that the x slot varies along genuine geodesics.
inline BPropertyReport check_b_properties(const SemilinearSpec& b, int n_samples, std::uint64_t seed = 1) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uu(-3.0, 3.0), ug(0.0, 3.0), ud(1e-3, 1.0);
  std::normal_distribution<double> gn;
  const ManifoldModel M({Sphere{2, 1.0}});
  auto random_point = [&] {
    Vec v(3);
    do {
      for (int i = 0; i < 3; ++i) v[i] = gn(rng);
    } while (v.norm() < 1e-3);
    v.normalize();
    if (v[2] < 0) v[2] = -v[2];  // upper hemisphere keeps pairs well inside the injectivity radius
    return make_point(M, v);
  };

  BPropertyReport rep;
  PropertyCheck weak{"nonincreasing_in_u"}, strict{"strictly_decreasing_in_u"}, grad{"nonincreasing_in_gradient"},
      concave{"jointly_concave"};
  const double tol = 1e-12;
  for (int s = 0; s < n_samples; ++s) {
    const Point x = random_point(), y = random_point();
    const double u1 = uu(rng), u2 = u1 + ud(rng), g = ug(rng), g2 = g + ud(rng);
    const double b1 = b(x, u1, g), b2 = b(x, u2, g);
    const double scale = std::max(1.0, std::abs(b1));
    if (weak.passed && b2 > b1 + tol * scale) {
      weak.passed = false;
      weak.witness = "u1=" + std::to_string(u1) + " < u2=" + std::to_string(u2) + " but b(u1)=" + std::to_string(b1) +
                     " < b(u2)=" + std::to_string(b2);
    }
    if (strict.passed && !(b2 < b1)) {
      strict.passed = false;
      strict.witness = "u1=" + std::to_string(u1) + " u2=" + std::to_string(u2) + " b equal or increasing";
    }
    if (grad.passed && b(x, u1, g2) > b(x, u1, g) + tol * scale) {
      grad.passed = false;
      grad.witness = "g1=" + std::to_string(g) + " < g2=" + std::to_string(g2) + " increases b";
    }
    if (concave.passed && !same_point(x, y)) {
      const Point z = connect(M, x, y).at(0.0);
      const double ua = uu(rng), ub = uu(rng);
      const double mid = b(z, 0.5 * (ua + ub), g);
      const double avg = 0.5 * (b(x, ua, g) + b(y, ub, g));
      if (mid < avg - tol * std::max(1.0, std::abs(avg))) {
        concave.passed = false;
        concave.witness = "u(x)=" + std::to_string(ua) + " u(y)=" + std::to_string(ub) + " b(mid)=" +
                          std::to_string(mid) + " < average=" + std::to_string(avg);
      }
    }
  }
  rep.strict = strict.passed;
  rep.metadata_consistent = weak.passed == b.nonincreasing() && strict.passed == b.strictly_decreasing() &&
                            grad.passed == b.nonincreasing_in_gradient() && concave.passed == b.jointly_concave();
  rep.checks = {weak, strict, grad, concave};
  rep.passed = weak.passed && grad.passed && concave.passed;
  return rep;
}

}  // namespace tpc
