#pragma once

// Verification suites for the geometric layer: random geodesic pairs, the
// Jacobi closed form against a BVP oracle, second-variation fields by two
// routes, and the transfer matrix.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "tpc/geodesic.hpp"
#include "tpc/jacobi.hpp"
#include "tpc/variation.hpp"

namespace tpc {

// Random sampling on a model space.

inline Point random_point(const ManifoldModel& M, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Vec c(M.ambient_dim());
  for (int f = 0; f < M.num_factors(); ++f) {
    auto b = factor_block(M, c, f);
    for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = M.is_sphere(f) ? gauss(rng) : uni(rng);
  }
  return make_point(M, std::move(c));
}

/// Random tangent vector at p with metric length in [lo, hi]; every factor
/// gets a nonzero share.
inline TangentVec random_tangent(const ManifoldModel& M, const Point& p, std::mt19937_64& rng, double lo = 1.0,
                                 double hi = 1.0) {
  std::normal_distribution<double> gauss;
  Vec v(M.ambient_dim());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = gauss(rng);
  TangentVec X = make_tangent(M, p, std::move(v));
  const double len = std::uniform_real_distribution<double>(lo, hi)(rng);
  return (len / metric_norm(M, X)) * X;
}

/// Random pair at distance in [lo, hi] with mixed velocity.
inline std::pair<Point, Point> random_pair(const ManifoldModel& M, std::mt19937_64& rng, double lo, double hi) {
  const Point x = random_point(M, rng);
  return {x, exp_map(M, x, random_tangent(M, x, rng, lo, hi))};
}

/// Upper distance for random pairs, safely inside pi/sqrt(A) and the
/// per-factor antipodal limit.
inline double safe_distance(const ManifoldModel& M) {
  const double A = M.curvature_bound();
  return A > 0.0 ? 0.85 * std::numbers::pi / std::sqrt(A) : 2.0;
}

// Named checks.

enum class Relation { below, at_most, at_least, above };

struct Check {
  std::string name;
  double value = 0.0;
  double bound = 0.0;
  Relation relation = Relation::below;
  bool passed = false;
};

inline Check make_check(std::string name, double value, Relation rel, double bound) {
  bool ok = false;
  switch (rel) {
    case Relation::below: ok = value < bound; break;
    case Relation::at_most: ok = value <= bound; break;
    case Relation::at_least: ok = value >= bound; break;
    case Relation::above: ok = value > bound; break;
  }
  return {std::move(name), value, bound, rel, ok && std::isfinite(value)};
}

inline const char* to_string(Relation r) {
  switch (r) {
    case Relation::below: return "<";
    case Relation::at_most: return "<=";
    case Relation::at_least: return ">=";
    case Relation::above: return ">";
  }
  return "?";
}

inline bool all_passed(const std::vector<Check>& cs) {
  return std::all_of(cs.begin(), cs.end(), [](const Check& c) { return c.passed; });
}

inline nlohmann::json to_json(const Check& c) {
  return {{"name", c.name},
          {"value", c.value},
          {"relation", to_string(c.relation)},
          {"bound", c.bound},
          {"passed", c.passed}};
}

// Suites.

/// Exponential/logarithm round trip, distance symmetry, transport isometry
/// and parallel frame invariants over random pairs.
inline std::vector<Check> verify_geometry(const ManifoldModel& M, int n_pairs, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double roundtrip = 0.0, symmetry = 0.0, isometry = 0.0, frame = 0.0;
  for (int i = 0; i < n_pairs; ++i) {
    const auto [x, y] = random_pair(M, rng, 0.05, safe_distance(M));
    roundtrip = std::max(roundtrip, distance(M, exp_map(M, x, log_map(M, x, y)), y));
    symmetry = std::max(symmetry, std::abs(distance(M, x, y) - distance(M, y, x)));
    const TangentVec X = random_tangent(M, x, rng), Y = random_tangent(M, x, rng);
    const TangentVec tX = transport(M, x, y, X), tY = transport(M, x, y, Y);
    isometry = std::max(isometry, std::abs(metric_inner(M, tX, tY) - metric_inner(M, X, Y)));
    const auto fr = build_frame(connect(M, x, y));
    for (double t : {-1.0, 0.0, 1.0})
      frame = std::max({frame, fr.orthonormality_defect(t), fr.kappa_defect(t), fr.c_constancy_defect(t)});
  }
  return {make_check("exp_log_roundtrip", roundtrip, Relation::below, 1e-10),
          make_check("distance_symmetry", symmetry, Relation::below, 1e-12),
          make_check("transport_isometry", isometry, Relation::below, 1e-10),
          make_check("parallel_frame_defect", frame, Relation::below, 1e-10)};
}

/// Sup deviation between the closed-form endpoint Jacobi fields and the
/// finite-difference BVP oracle over random pairs.
inline double jacobi_oracle_deviation(const ManifoldModel& M, int n_pairs, std::uint64_t seed, int n_oracle = 400) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int i = 0; i < n_pairs; ++i) {
    const auto [x, y] = random_pair(M, rng, 0.05, safe_distance(M));
    const auto fr = build_frame(connect(M, x, y));
    for (Endpoint e : {Endpoint::x, Endpoint::y})
      for (int a = 0; a < fr.dim(); ++a) {
        const auto s = jacobi_bvp_oracle(fr, e, a, n_oracle);
        for (std::size_t k = 0; k < s.t.size(); ++k)
          worst = std::max(worst, (s.comps.col(static_cast<Eigen::Index>(k)) - jacobi_components(fr, e, a, s.t[k]))
                                      .cwiseAbs()
                                      .maxCoeff());
      }
  }
  return worst;
}

struct TransferStats {
  double cos_deviation = 0.0;  // max |V_a - cos(sqrt(kappa_a) |Gamma'|)|
  double max_entry = 0.0;
};

inline TransferStats transfer_stats(const ManifoldModel& M, int n_frames, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  TransferStats s;
  for (int i = 0; i < n_frames; ++i) {
    const auto [x, y] = random_pair(M, rng, 0.05, safe_distance(M));
    const auto fr = build_frame(connect(M, x, y));
    const auto V = transfer_matrix(fr);
    for (int a = 0; a < fr.dim(); ++a) {
      s.cos_deviation = std::max(s.cos_deviation, std::abs(V.entries[a] - std::cos(std::sqrt(fr.kappa(a)) * fr.speed())));
      s.max_entry = std::max(s.max_entry, V.entries[a]);
    }
  }
  return s;
}

/// Midpoint values of K+ and K- (all index pairs, all components) stacked
/// into one vector.
inline Vec midpoint_combos(const KFieldSet& f) {
  const auto mid = static_cast<Eigen::Index>(midpoint_index(f.t()));
  const int n = f.dim();
  Vec out(2 * n * n * n);
  Eigen::Index k = 0;
  for (int s : {1, -1})
    for (const auto& c : k_combos(f, s)) {
      out.segment(k, n) = c.comps.col(mid);
      k += n;
    }
  return out;
}

struct KFieldStats {
  double ode_midpoint = 0.0;               // sup |K+-(0)| from the ODE route
  std::vector<double> steps;               // FD steps h
  std::vector<double> fd_midpoint;         // sup |K+-(0)| from FD at each h
  std::vector<double> fd_vs_ode;           // sup FD - ODE over the whole segment at each h
  double extrapolated = 0.0;               // Richardson combination of the two finest FD midpoints
  double oddness = 0.0;                    // max |K(t) + K(-t)| at 21 symmetric samples, ODE route
  double identity = 0.0;                   // max residual of the second-order identity
  double sphere_like_c = 0.0;              // max |c_abg| with a, b, g all off the velocity
  double transverse_k = 0.0;               // max |<K+-_ab + K+-_ba, E_g>| for a, b, g off the velocity, ODE route

  static double slope(double coarse, double fine, double ratio) { return std::log(coarse / fine) / std::log(ratio); }
};

/// Both routes on one pair; the FD ladder must halve.
inline KFieldStats kfield_stats(const ManifoldModel& M, const Point& x, const Point& y,
                                const std::vector<double>& steps = {1e-2, 5e-3, 2.5e-3}, int n_ode = 800,
                                int n_fd = 80) {
  const auto fr = build_frame(connect(M, x, y));
  const auto ode = k_fields_ode(fr, n_ode);
  const int n = fr.dim();
  const int stride = n_ode / n_fd;
  KFieldStats s;
  s.steps = steps;
  s.ode_midpoint = midpoint_combos(ode).cwiseAbs().maxCoeff();
  std::vector<Vec> mids;
  for (double h : steps) {
    const auto fd = k_fields_fd(M, x, y, h, n_fd);
    mids.push_back(midpoint_combos(fd));
    s.fd_midpoint.push_back(mids.back().cwiseAbs().maxCoeff());
    double dev = 0.0;
    for (KKind k : kAllKinds)
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          for (std::size_t i = 0; i < fd.t().size(); ++i)
            dev = std::max(dev, (fd.at(k, a, b).col(static_cast<Eigen::Index>(i)) -
                                 ode.at(k, a, b).col(static_cast<Eigen::Index>(i) * stride))
                                    .cwiseAbs()
                                    .maxCoeff());
    s.fd_vs_ode.push_back(dev);
  }
  const std::size_t m = mids.size();
  s.extrapolated = m >= 2 ? ((4 * mids[m - 1] - mids[m - 2]) / 3).cwiseAbs().maxCoeff() : s.fd_midpoint.back();

  const auto mid = static_cast<Eigen::Index>(midpoint_index(ode.t()));
  for (int sgn : {1, -1})
    for (const auto& c : k_combos(ode, sgn)) {
      for (int j = 0; j <= 10; ++j) {
        const Eigen::Index off = mid * j / 10;
        s.oddness = std::max(s.oddness, (c.comps.col(mid + off) + c.comps.col(mid - off)).cwiseAbs().maxCoeff());
      }
      for (int g = 0; g < n; ++g) {
        s.identity = std::max(s.identity, fundamental_identity_residual(fr, c, g));
      }
    }
  for (int sgn : {1, -1})
    for (int a = 1; a < n; ++a)
      for (int b = a; b < n; ++b) {
        const Mat sym = k_combo(ode, sgn, a, b).comps + k_combo(ode, sgn, b, a).comps;
        for (int g = 1; g < n; ++g) s.transverse_k = std::max(s.transverse_k, sym.row(g).cwiseAbs().maxCoeff());
      }
  for (int a = 1; a < n; ++a)
    for (int b = 1; b < n; ++b)
      for (int g = 1; g < n; ++g) s.sphere_like_c = std::max(s.sphere_like_c, std::abs(fr.c(a, b, g)));
  return s;
}

/// Observed order of the FD route. Above the roundoff floor it is the
/// Richardson slope of the midpoint residual; at the floor the midpoint
/// carries no truncation error, so the order is read from the FD-vs-ODE
/// deviation over the whole segment. When both sit at the floor the FD route
/// is exact to roundoff.
inline Check fd_order_check(const KFieldStats& s, double min_order = 1.9, double floor = 1e-10) {
  const std::size_t m = s.steps.size();
  auto worst_slope = [&](const std::vector<double>& r) {
    double w = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < m; ++i) w = std::min(w, KFieldStats::slope(r[i], r[i + 1], s.steps[i] / s.steps[i + 1]));
    return w;
  };
  if (*std::max_element(s.fd_midpoint.begin(), s.fd_midpoint.end()) >= floor)
    return make_check("fd_midpoint_order", worst_slope(s.fd_midpoint), Relation::at_least, min_order);
  if (*std::max_element(s.fd_vs_ode.begin(), s.fd_vs_ode.end()) >= floor)
    return make_check("fd_deviation_order", worst_slope(s.fd_vs_ode), Relation::at_least, min_order);
  return make_check("fd_exact_to_roundoff", *std::max_element(s.fd_vs_ode.begin(), s.fd_vs_ode.end()), Relation::below,
                    floor);
}

}  // namespace tpc
