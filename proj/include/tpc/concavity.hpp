#pragma once

// Two-point function Z(x, y) = u(z) - (u(x) + u(y)) / 2 with z the geodesic
// midpoint, its minimum scan, and the pointwise diagnostics evaluated at a
// minimizing pair.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "tpc/field.hpp"
#include "tpc/geodesic.hpp"
#include "tpc/isotropic.hpp"
#include "tpc/jacobi.hpp"
#include "tpc/semilinear.hpp"

namespace tpc {

enum class PairClass { interior, x_on_boundary, y_on_boundary, both_on_boundary, diagonal };
enum class Verdict { concave_certified_numerically, violation_found, inconclusive };
enum class BoundaryStatus { holds, violated, not_checked };

inline std::string to_string(PairClass c) {
  switch (c) {
    case PairClass::interior: return "interior";
    case PairClass::x_on_boundary: return "x_on_boundary";
    case PairClass::y_on_boundary: return "y_on_boundary";
    case PairClass::both_on_boundary: return "both_on_boundary";
    case PairClass::diagonal: return "diagonal";
  }
  return "?";
}

inline std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::concave_certified_numerically: return "concave_certified_numerically";
    case Verdict::violation_found: return "violation_found";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

inline std::string to_string(BoundaryStatus s) {
  switch (s) {
    case BoundaryStatus::holds: return "holds";
    case BoundaryStatus::violated: return "violated";
    case BoundaryStatus::not_checked: return "not_checked";
  }
  return "?";
}

struct TwoPointSample {
  Point x, y, z;
  double Z = 0.0;
  PairClass classification = PairClass::diagonal;
};

namespace detail {

inline constexpr double boundary_tol = 1e-9;

inline PairClass classify(const DomainSpec& d, const Point& x, const Point& y) {
  const bool bx = d.dist_to_boundary(x) <= boundary_tol, by = d.dist_to_boundary(y) <= boundary_tol;
  if (bx && by) return PairClass::both_on_boundary;
  if (bx) return PairClass::x_on_boundary;
  if (by) return PairClass::y_on_boundary;
  return PairClass::interior;
}

/// Runs body(i) for i in [0, n) on up to `threads` workers with static chunks.
template <class Body>
void parallel_for(int n, int threads, Body&& body) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (int w = 0; w < threads; ++w)
    pool.emplace_back([&, w] {
      for (int i = w; i < n; i += threads) body(i);
    });
}

inline int default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

inline double radical_inverse(std::uint64_t i, int base) {
  double f = 1.0, r = 0.0;
  while (i > 0) {
    f /= base;
    r += f * static_cast<double>(i % base);
    i /= base;
  }
  return r;
}

inline constexpr std::array<int, 8> halton_bases{2, 3, 5, 7, 11, 13, 17, 19};

/// Halton point i in [0,1)^dim with a Cranley-Patterson rotation.
inline Vec halton(std::uint64_t i, const Vec& shift) {
  Vec w(shift.size());
  for (Eigen::Index d = 0; d < shift.size(); ++d) {
    const double h = radical_inverse(i, halton_bases[static_cast<std::size_t>(d)]) + shift[d];
    w[d] = h - std::floor(h);
  }
  return w;
}

}  // namespace detail

/// Z at (x, y); exactly 0 on the diagonal.
inline TwoPointSample z_value(const Field& u, const Point& x, const Point& y) {
  const auto& M = u.domain().manifold();
  TwoPointSample s{x, y, x, 0.0, PairClass::diagonal};
  if (same_point(x, y)) return s;
  const auto seg = connect(M, x, y);
  s.z = seg.at(0.0);
  s.Z = u.value(s.z) - 0.5 * (u.value(x) + u.value(y));
  s.classification = detail::classify(u.domain(), x, y);
  return s;
}

/// Jets at x, y and z expressed in the parallel frame along the connecting
/// geodesic, together with the transfer matrix.
struct PairJets {
  ParallelFrame frame;
  TransferDiag V;
  std::array<Jet, 3> jets;  // x, z, y
  std::array<Vec, 3> grad;  // parallel frame components
  std::array<Mat, 3> hess;
};

inline PairJets pair_jets(const Field& u, const Point& x, const Point& y) {
  const auto& M = u.domain().manifold();
  const auto seg = connect(M, x, y);
  auto frame = build_frame(seg);
  auto V = transfer_matrix(frame);
  PairJets P{std::move(frame), std::move(V), {}, {}, {}};
  const std::array<double, 3> times{-1.0, 0.0, 1.0};
  for (std::size_t i = 0; i < 3; ++i) {
    const Point p = seg.at(times[i]);
    P.jets[i] = u.jet(i == 0 ? x : i == 2 ? y : p);
    const auto E = P.frame.frame_at(times[i]);
    const int n = P.frame.dim();
    Mat B(n, n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) B(a, b) = metric_inner(M, P.jets[i].frame[a], E[b]);
    P.grad[i] = B.transpose() * P.jets[i].grad;
    P.hess[i] = B.transpose() * P.jets[i].hess * B;
  }
  return P;
}

struct FirstOrderResult {
  double residual_x = 0.0;  // |grad u(z) - V grad u(x)|
  double residual_y = 0.0;  // |grad u(z) - V grad u(y)|
  double norm_x = 0.0, norm_y = 0.0, norm_z = 0.0;

  /// |grad u(z)| <= |grad u(x)| and |grad u(z)| <= |grad u(y)| within tol.
  bool contracting(double tol) const { return norm_z <= norm_x + tol && norm_z <= norm_y + tol; }
  double norm_gap() const { return std::abs(norm_x - norm_y); }
};

inline FirstOrderResult first_order_check(const Field& u, const Point& x, const Point& y) {
  const auto P = pair_jets(u, x, y);
  const Mat V = P.V.matrix();
  FirstOrderResult r;
  r.residual_x = (P.grad[1] - V * P.grad[0]).norm();
  r.residual_y = (P.grad[1] - V * P.grad[2]).norm();
  r.norm_x = P.grad[0].norm();
  r.norm_z = P.grad[1].norm();
  r.norm_y = P.grad[2].norm();
  return r;
}

struct SecondOrderResult {
  Mat D1, D2;  // H_z - V (H_x + H_y) V / 2 and -(H_x + H_y)
  double min_eig_D1 = 0.0, min_eig_D2 = 0.0;
};

inline SecondOrderResult second_order_check(const Field& u, const Point& x, const Point& y) {
  const auto P = pair_jets(u, x, y);
  const Mat V = P.V.matrix();
  const Mat S = P.hess[0] + P.hess[2];
  SecondOrderResult r;
  r.D1 = P.hess[1] - 0.5 * V * S * V;
  r.D2 = -S;
  r.min_eig_D1 = sorted_eigenvalues(r.D1)[0];
  r.min_eig_D2 = sorted_eigenvalues(r.D2)[0];
  return r;
}

/// Second difference of s -> Z(exp_x(s a), exp_y(s b)) at s = 0, with a and b
/// given as parallel frame components at x and y.
inline double hessian_z_fd(const Field& u, const Point& x, const Point& y, const Vec& a, const Vec& b, double h) {
  const auto& M = u.domain().manifold();
  const auto frame = build_frame(connect(M, x, y));
  const TangentVec A = frame.from_components(a, -1.0), Bv = frame.from_components(b, 1.0);
  auto Z = [&](double s) { return z_value(u, exp_map(M, x, s * A), exp_map(M, y, s * Bv)).Z; };
  return (Z(h) - 2 * Z(0.0) + Z(-h)) / (h * h);
}

struct ChainAudit {
  std::array<double, 8> expressions{};
  std::array<double, 7> slacks{};  // expressions[i + 1] - expressions[i]

  double min_slack() const { return *std::min_element(slacks.begin(), slacks.end()); }
};

inline const std::array<std::string, 7>& chain_step_names() {
  static const std::array<std::string, 7> names{"pde_at_midpoint", "monotone_in_matrix", "convex_in_matrix",
                                                "monotone_in_gradient", "pde_at_endpoints",
                                                "b_nonincreasing_in_gradient", "b_jointly_concave"};
  return names;
}

/// Evaluates the chain from b at the midpoint to b at the averaged value,
/// using the field's own jets.
inline ChainAudit chain_audit(const Field& u, const Point& x, const Point& y, const IsotropicFSpec& f,
                              const SemilinearSpec& b) {
  const auto& prov = u.provenance();
  if (prov.b) {
    if (f.kind != FKind::neg_trace) throw ConfigError("chain_audit: field solves -Lap u = b but f is " + f.name());
    if (!(*prov.b == b)) throw ConfigError("chain_audit: b " + b.name() + " differs from the field's " + prov.b->name());
  }
  if (b.kind == BKind::gradient_coupled && prov.equation != "sampled")
    throw ConfigError("chain_audit: gradient-coupled b is not an elliptic right-hand side");
  const auto P = pair_jets(u, x, y);
  const Point z = P.frame.segment().at(0.0);
  const double ux = P.jets[0].value, uz = P.jets[1].value, uy = P.jets[2].value;
  const double gx = P.grad[0].norm(), gz = P.grad[1].norm(), gy = P.grad[2].norm();
  const Mat &Hx = P.hess[0], &Hz = P.hess[1], &Hy = P.hess[2];
  auto fv = [&](double p, const Mat& W) { return evaluate_isotropic_f(f, p, W); };
  ChainAudit c;
  auto& e = c.expressions;
  e[0] = b(z, uz, gz);
  e[1] = fv(gz, -Hz);
  e[2] = fv(gz, -0.5 * (Hx + Hy));
  e[3] = 0.5 * fv(gz, -Hx) + 0.5 * fv(gz, -Hy);
  e[4] = 0.5 * fv(gx, -Hx) + 0.5 * fv(gy, -Hy);
  e[5] = 0.5 * b(x, ux, gx) + 0.5 * b(y, uy, gy);
  e[6] = 0.5 * b(x, ux, gz) + 0.5 * b(y, uy, gz);
  e[7] = b(z, 0.5 * (ux + uy), gz);
  for (std::size_t i = 0; i < 7; ++i) c.slacks[i] = e[i + 1] - e[i];
  return c;
}

struct BoundaryCheck {
  BoundaryStatus status = BoundaryStatus::not_checked;
  double worst_margin = std::numeric_limits<double>::infinity();
  std::optional<TwoPointSample> witness;
  std::string reason;
  int n_pairs = 0;
};

/// Minimum over sampled x on the boundary and y in the closure of
/// Du_x(gamma'(-1)) - Du_y(gamma'(1)); pairs closer than min_distance are skipped.
inline BoundaryCheck boundary_condition_check(const Field& u, int n_pairs, std::uint64_t seed = 1,
                                              double min_distance = 0.0) {
  BoundaryCheck r;
  if (u.provenance().growth_condition) {
    r.reason = "growth_condition";
    return r;
  }
  const auto& d = u.domain();
  const auto& M = d.manifold();
  min_distance = std::max(min_distance, 2 * u.resolution());
  std::mt19937_64 rng(seed);
  for (int k = 0; k < n_pairs; ++k) {
    const Point x = d.sample_boundary(rng), y = d.sample(rng);
    if (distance(M, x, y) < std::max(min_distance, 1e-9)) continue;
    const auto seg = connect(M, x, y);
    const double margin = metric_inner(M, covariant_gradient(u, x), seg.velocity(-1.0)) -
                          metric_inner(M, covariant_gradient(u, y), seg.velocity(1.0));
    ++r.n_pairs;
    if (margin < r.worst_margin) {
      r.worst_margin = margin;
      r.witness = TwoPointSample{x, y, seg.at(0.0), 0.0, detail::classify(d, x, y)};
    }
  }
  if (r.n_pairs == 0) {
    r.reason = "no admissible pairs";
    return r;
  }
  r.status = r.worst_margin > 0.0 ? BoundaryStatus::holds : BoundaryStatus::violated;
  return r;
}

struct ScanConfig {
  int n_pairs = 10000;
  int refine_top = 10;
  std::uint64_t seed = 1;
  double tol_Z = 1e-6;
  double exclusion_factor = 2.0;  // pairs closer than factor * h are skipped
  int boundary_pairs = 1000;
  int min_samples = 100;  // fewer admissible pairs gives an inconclusive verdict
  int max_sweeps = 400;
  int threads = 0;  // 0: available parallelism
  bool keep_samples = true;
  std::optional<IsotropicFSpec> f;  // chain audit operator, default neg_trace when the field solves -Lap u = b
  std::optional<SemilinearSpec> b;
};

struct RefinementStep {
  int candidate = 0;
  double initial_Z = 0.0, final_Z = 0.0;
  int sweeps = 0;
};

struct ConcavityReport {
  double min_Z = 0.0;
  TwoPointSample argmin;
  int n_samples = 0, n_excluded = 0;
  std::vector<RefinementStep> trace;
  BoundaryCheck boundary;
  std::optional<FirstOrderResult> first_order;
  std::optional<SecondOrderResult> second_order;
  std::optional<ChainAudit> chain;
  Verdict verdict = Verdict::inconclusive;
  double tol_Z = 1e-6;
  double trust_collar = 0.0;
  std::uint64_t seed = 0;
  std::vector<TwoPointSample> samples;  // admissible raw samples in scan order
  std::vector<TwoPointSample> refined;  // refined candidates, ascending Z
};

namespace detail {

struct Refiner {
  const Field& u;
  const DomainSpec& region;
  double exclusion;
  int max_sweeps;

  bool admissible(const Point& x, const Point& y) const {
    return region.contains(x, 0.0) && region.contains(y, 0.0) &&
           distance(region.manifold(), x, y) >= std::max(exclusion, 1e-9);
  }

  /// Coordinate descent in the product chart with step halving.
  std::pair<TwoPointSample, int> run(TwoPointSample s) const {
    const int m = region.chart_dim();
    Vec qx = region.point_to_chart(s.x), qy = region.point_to_chart(s.y);
    double step = 0.05 * region.diameter();
    const double stop = 1e-8 * region.diameter();
    int sweeps = 0;
    while (step > stop && sweeps < max_sweeps) {
      ++sweeps;
      bool improved = false;
      for (int c = 0; c < 2 * m; ++c)
        for (double sign : {1.0, -1.0}) {
          Vec nx = qx, ny = qy;
          (c < m ? nx[c] : ny[c - m]) += sign * step;
          const Point px = region.chart_to_point(nx), py = region.chart_to_point(ny);
          if (!admissible(px, py)) continue;
          const auto t = z_value(u, px, py);
          if (t.Z < s.Z) {
            s = t;
            qx = region.point_to_chart(px);
            qy = region.point_to_chart(py);
            improved = true;
            break;
          }
        }
      if (!improved) step *= 0.5;
    }
    s.classification = classify(u.domain(), s.x, s.y);
    return {s, sweeps};
  }
};

}  // namespace detail

/// Quasi-random pair scan of Z with local refinement of the lowest candidates.
/// Fields carrying a trust collar are scanned on the domain shrunk by it.
inline ConcavityReport scan_min(const Field& u, const ScanConfig& cfg = {}) {
  const auto& dom = u.domain();
  const auto& M = dom.manifold();
  const double collar = u.provenance().trust_collar;
  const DomainSpec region = collar > 0.0 ? dom.shrink(collar) : dom;
  const double exclusion = cfg.exclusion_factor * u.resolution();
  const int threads = cfg.threads > 0 ? cfg.threads : detail::default_threads();

  ConcavityReport rep;
  rep.tol_Z = cfg.tol_Z;
  rep.seed = cfg.seed;
  rep.trust_collar = collar;

  const int m = region.chart_dim();
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const Vec shift = Vec::NullaryExpr(2 * m, [&](Eigen::Index) { return U(rng); });

  std::vector<std::optional<TwoPointSample>> raw(static_cast<std::size_t>(cfg.n_pairs));
  detail::parallel_for(cfg.n_pairs, threads, [&](int i) {
    const Vec w = detail::halton(static_cast<std::uint64_t>(i) + 1, shift);
    const Point x = region.sample_from_unit(w.head(m)), y = region.sample_from_unit(w.tail(m));
    if (distance(M, x, y) < std::max(exclusion, 1e-9)) return;
    raw[static_cast<std::size_t>(i)] = z_value(u, x, y);
  });

  std::vector<TwoPointSample> samples;
  samples.reserve(raw.size());
  for (auto& s : raw)
    if (s) samples.push_back(std::move(*s));
  rep.n_samples = static_cast<int>(samples.size());
  rep.n_excluded = cfg.n_pairs - rep.n_samples;

  std::vector<int> order(samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return samples[a].Z < samples[b].Z; });
  const int k = std::min<int>(cfg.refine_top, static_cast<int>(order.size()));

  const detail::Refiner refiner{u, region, exclusion, cfg.max_sweeps};
  std::vector<std::pair<TwoPointSample, int>> refined(static_cast<std::size_t>(k));
  detail::parallel_for(k, threads, [&](int i) { refined[i] = refiner.run(samples[order[i]]); });
  for (int i = 0; i < k; ++i) {
    rep.trace.push_back({i, samples[order[i]].Z, refined[i].first.Z, refined[i].second});
    rep.refined.push_back(refined[i].first);
  }
  std::stable_sort(rep.refined.begin(), rep.refined.end(),
                   [](const TwoPointSample& a, const TwoPointSample& b) { return a.Z < b.Z; });

  if (!rep.refined.empty()) {
    rep.argmin = rep.refined.front();
    rep.min_Z = rep.argmin.Z;
  } else {
    rep.argmin = TwoPointSample{region.chart_to_point(Vec::Zero(m)), region.chart_to_point(Vec::Zero(m)), {}, 0.0,
                                PairClass::diagonal};
    rep.argmin.z = rep.argmin.x;
  }

  rep.boundary = boundary_condition_check(u, cfg.boundary_pairs, cfg.seed, exclusion);

  if (rep.argmin.classification != PairClass::diagonal) {
    rep.first_order = first_order_check(u, rep.argmin.x, rep.argmin.y);
    rep.second_order = second_order_check(u, rep.argmin.x, rep.argmin.y);
    auto f = cfg.f;
    auto b = cfg.b;
    if (!b && u.provenance().b) b = u.provenance().b;
    if (!f && b) f = IsotropicFSpec::neg_trace();
    if (f && b) rep.chain = chain_audit(u, rep.argmin.x, rep.argmin.y, *f, *b);
  }

  if (rep.min_Z < -cfg.tol_Z)
    rep.verdict = Verdict::violation_found;
  else if (rep.n_samples < cfg.min_samples)
    rep.verdict = Verdict::inconclusive;
  else
    rep.verdict = Verdict::concave_certified_numerically;
  if (cfg.keep_samples) rep.samples = std::move(samples);
  return rep;
}

/// Admissible samples at least `margin` from the boundary, ascending in Z.
inline std::vector<TwoPointSample> lowest_interior_pairs(const ConcavityReport& rep, const DomainSpec& d,
                                                         double margin, int count) {
  std::vector<TwoPointSample> out;
  auto consider = [&](const std::vector<TwoPointSample>& src) {
    for (const auto& s : src)
      if (d.dist_to_boundary(s.x) >= margin && d.dist_to_boundary(s.y) >= margin) out.push_back(s);
  };
  consider(rep.refined);
  consider(rep.samples);
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.Z < b.Z; });
  if (static_cast<int>(out.size()) > count) out.resize(static_cast<std::size_t>(count));
  return out;
}

struct ParabolicReport {
  std::vector<double> times;
  std::vector<ConcavityReport> snapshots;
  double min_Z_over_time = 0.0;
  bool initial_concave = false;
  /// Set only when the initial snapshot is certified concave.
  std::optional<bool> preserved;
};

inline ParabolicReport parabolic_scan(const TimeSeriesField& series, const ScanConfig& cfg = {}) {
  ParabolicReport r;
  r.min_Z_over_time = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < series.size(); ++i) {
    r.times.push_back(series.time(i));
    r.snapshots.push_back(scan_min(series.at(i), cfg));
    r.min_Z_over_time = std::min(r.min_Z_over_time, r.snapshots.back().min_Z);
  }
  if (r.snapshots.empty()) return r;
  r.initial_concave = r.snapshots.front().verdict == Verdict::concave_certified_numerically;
  if (r.initial_concave)
    r.preserved = std::all_of(r.snapshots.begin(), r.snapshots.end(),
                              [](const ConcavityReport& s) { return s.verdict != Verdict::violation_found; });
  return r;
}

// Exports.

inline nlohmann::json to_json(const TwoPointSample& s, const DomainSpec& d) {
  auto vec = [](const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  return {{"x", vec(s.x.coords)},
          {"y", vec(s.y.coords)},
          {"z", vec(s.z.coords)},
          {"x_chart", vec(d.point_to_chart(s.x))},
          {"y_chart", vec(d.point_to_chart(s.y))},
          {"Z", s.Z},
          {"classification", to_string(s.classification)}};
}

inline nlohmann::json to_json(const ConcavityReport& r, const DomainSpec& d) {
  nlohmann::json j;
  j["min_Z"] = r.min_Z;
  j["argmin"] = to_json(r.argmin, d);
  j["n_samples"] = r.n_samples;
  j["n_excluded"] = r.n_excluded;
  j["tol_Z"] = r.tol_Z;
  j["trust_collar"] = r.trust_collar;
  j["seed"] = r.seed;
  j["verdict"] = to_string(r.verdict);
  auto& t = j["refinement_trace"] = nlohmann::json::array();
  for (const auto& s : r.trace)
    t.push_back({{"candidate", s.candidate}, {"initial_Z", s.initial_Z}, {"final_Z", s.final_Z}, {"sweeps", s.sweeps}});
  auto& bc = j["boundary_condition"];
  bc["status"] = to_string(r.boundary.status);
  bc["n_pairs"] = r.boundary.n_pairs;
  if (!r.boundary.reason.empty()) bc["reason"] = r.boundary.reason;
  if (r.boundary.witness) {
    bc["worst_margin"] = r.boundary.worst_margin;
    bc["witness"] = to_json(*r.boundary.witness, d);
  }
  if (r.first_order)
    j["first_order"] = {{"residual_x", r.first_order->residual_x},
                        {"residual_y", r.first_order->residual_y},
                        {"grad_norm_x", r.first_order->norm_x},
                        {"grad_norm_y", r.first_order->norm_y},
                        {"grad_norm_z", r.first_order->norm_z}};
  if (r.second_order)
    j["second_order"] = {{"min_eig_D1", r.second_order->min_eig_D1}, {"min_eig_D2", r.second_order->min_eig_D2}};
  if (r.chain) {
    auto& c = j["chain_audit"];
    c["expressions"] = r.chain->expressions;
    for (std::size_t i = 0; i < 7; ++i) c["slacks"][chain_step_names()[i]] = r.chain->slacks[i];
  }
  return j;
}

/// One row per admissible raw sample: chart coordinates of x and y, then Z.
inline void write_samples_csv(std::ostream& os, const ConcavityReport& r, const DomainSpec& d) {
  const auto names = chart_names(d);
  for (const auto& n : names) os << "x_" << n << ",";
  for (const auto& n : names) os << "y_" << n << ",";
  os << "Z,classification\n";
  os.precision(17);
  for (const auto& s : r.samples) {
    for (const Vec& q : {d.point_to_chart(s.x), d.point_to_chart(s.y)})
      for (Eigen::Index a = 0; a < q.size(); ++a) os << q[a] << ",";
    os << s.Z << "," << to_string(s.classification) << "\n";
  }
}

}  // namespace tpc
