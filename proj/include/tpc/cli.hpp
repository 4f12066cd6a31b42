#pragma once

// Configuration-driven experiments: each runs one suite, collects named
// checks, and writes report.json, samples.csv and optionally field.csv.

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tpc/concavity.hpp"
#include "tpc/config.hpp"
#include "tpc/pde.hpp"
#include "tpc/verify.hpp"

namespace tpc::cli {

inline constexpr int kSchemaVersion = 1;
inline constexpr int kExitPass = 0;
inline constexpr int kExitTolerance = 1;
inline constexpr int kExitConfig = 2;

inline const std::vector<std::string>& experiments() {
  static const std::vector<std::string> names{"verify-geometry", "verify-jacobi", "verify-kfields", "solve",
                                              "scan",            "parabolic-scan", "chain-audit",   "check-hypotheses"};
  return names;
}

struct RunResult {
  int exit_code = kExitPass;
  nlohmann::json report;
  std::string error;  // config error message, empty otherwise
};

// Config sections shared by several experiments.

inline ManifoldModel read_manifold(ConfigReader& cfg) {
  auto t = cfg.table("manifold");
  const auto types = t.strings("factors", {"sphere"});
  const auto dims = t.numbers("dims", std::vector<double>(types.size(), 2.0), 1, 16);
  const auto curv = t.numbers("curvatures", std::vector<double>(types.size(), 1.0), 0.0);
  if (types.empty()) t.fail("factors", "at least one factor is required");
  if (dims.size() != types.size() || curv.size() != types.size())
    t.fail("factors", "factors, dims and curvatures must have equal lengths");
  std::vector<Factor> fs;
  for (std::size_t i = 0; i < types.size(); ++i) {
    const int n = static_cast<int>(dims[i]);
    if (n != dims[i]) t.fail("dims", "dimensions must be integers");
    if (types[i] == "euclidean")
      fs.emplace_back(Euclidean{n});
    else if (types[i] == "sphere") {
      if (!(curv[i] > 0)) t.fail("curvatures", "sphere curvature must be positive");
      fs.emplace_back(Sphere{n, curv[i]});
    } else
      t.fail("factors", "unknown factor type '" + types[i] + "' (expected euclidean or sphere)");
  }
  return ManifoldModel(std::move(fs));
}

inline DomainSpec read_domain(ConfigReader& cfg) {
  auto t = cfg.table("domain");
  const auto kind = t.string("kind", "interval", {"interval", "rectangle", "disk", "cap", "product"});
  auto polar = [&](const std::string& k) {
    if (k == "disk") return DomainSpec::disk(t.number("radius", 1.0, 0.0));
    return DomainSpec::cap(t.number("radius", 1.2, 0.0), t.number("kappa", 1.0, 0.0));
  };
  if (kind == "interval") return DomainSpec::interval(t.number("half_length", 1.0, 0.0));
  if (kind == "rectangle")
    return DomainSpec::rectangle(t.number("x0", -1.0), t.number("x1", 1.0), t.number("y0", -1.0), t.number("y1", 1.0));
  if (kind == "product") {
    const auto base = t.string("base", "cap", {"disk", "cap"});
    return DomainSpec::product(polar(base), t.number("half_length", 0.8, 0.0));
  }
  return polar(kind);
}

inline ChartGrid read_grid(ConfigReader& cfg, const DomainSpec& d) {
  auto t = cfg.table("grid");
  GridSpec g;
  g.n = static_cast<int>(t.integer("n", 32, 4, 200000));
  g.n_angle = static_cast<int>(t.integer("n_angle", 0, 0, 4096));
  g.n_fibre = static_cast<int>(t.integer("n_fibre", 0, 0, 4096));
  return ChartGrid(d, g);
}

inline nlohmann::json grid_json(const ChartGrid& g) {
  std::vector<int> shape;
  for (int a = 0; a < g.num_axes(); ++a) shape.push_back(g.axis(a).count());
  return {{"nodes", g.size()}, {"shape", shape}, {"h", g.h()}};
}

/// Field named by [field]: a solved PDE or a manufactured test function.
inline std::shared_ptr<const Field> read_field(ConfigReader& cfg, const DomainSpec& d, nlohmann::json& prov) {
  auto t = cfg.table("field");
  const auto eq = t.string("equation", "torsion", {"torsion", "liouville", "saddle"});
  if (eq == "saddle") {
    if (d.kind() != DomainKind::rectangle && d.kind() != DomainKind::interval)
      t.fail("equation", "the saddle fixture needs a flat interval or rectangle");
    const auto g = read_grid(cfg, d);
    prov["grid"] = grid_json(g);
    return std::make_shared<ScalarField>(ScalarField::sample(g, [](const Point& p) {
      const double a = p.coords[0], b = p.coords.size() > 1 ? p.coords[1] : 0.0;
      return a * a - b * b;
    }));
  }
  const auto g = read_grid(cfg, d);
  prov["grid"] = grid_json(g);
  SolveInfo info;
  std::shared_ptr<const Field> f;
  if (eq == "torsion") {
    f = std::make_shared<ScalarField>(solve_torsion(g, &info));
  } else {
    LiouvilleOptions opt;
    opt.boundary_value = t.number("boundary_value", opt.boundary_value, 0.0, 60.0);
    opt.collar_steps = static_cast<int>(t.integer("collar_steps", opt.collar_steps, 0, 1000));
    f = std::make_shared<ScalarField>(solve_liouville(g, t.number("c", 1.0, 0.0), t.number("d", 1.0, 0.0), opt, &info));
  }
  prov["solver"] = {{"iterations", info.iterations}, {"residual", info.residual}};
  return f;
}

inline ScanConfig read_scan(ConfigReader& cfg, std::uint64_t seed, int threads) {
  auto t = cfg.table("scan");
  ScanConfig s;
  s.seed = seed;
  s.threads = threads;
  s.n_pairs = static_cast<int>(t.integer("n_pairs", s.n_pairs, 1, 10'000'000));
  s.refine_top = static_cast<int>(t.integer("refine_top", s.refine_top, 0, 10'000));
  s.tol_Z = t.number("tol_Z", s.tol_Z, 0.0);
  s.exclusion_factor = t.number("exclusion_factor", s.exclusion_factor, 0.0);
  s.boundary_pairs = static_cast<int>(t.integer("boundary_pairs", s.boundary_pairs, 0, 10'000'000));
  s.min_samples = static_cast<int>(t.integer("min_samples", s.min_samples, 0, 10'000'000));
  s.max_sweeps = static_cast<int>(t.integer("max_sweeps", s.max_sweeps, 1, 100'000));
  return s;
}

inline IsotropicFSpec read_f(const ConfigTable& t, const std::string& key, const std::string& fallback) {
  const auto name = t.string(key, fallback, {"neg_trace", "trace_exp", "weighted_trace"});
  if (name == "neg_trace") return IsotropicFSpec::neg_trace();
  if (name == "trace_exp") return IsotropicFSpec::trace_exp();
  return IsotropicFSpec::weighted_trace(t.numbers("weights", {1.0, 2.0}, 0.0));
}

inline SemilinearSpec read_b(const ConfigTable& t) {
  const auto name = t.string("b", "constant", {"constant", "liouville", "power_log", "gradient_coupled", "linear"});
  if (name == "constant") return SemilinearSpec::constant(t.number("value", 1.0));
  if (name == "liouville") return SemilinearSpec::liouville(t.number("c", 1.0), t.number("d", 1.0));
  if (name == "power_log") return SemilinearSpec::power_log(t.number("p", 0.5));
  if (name == "linear") return SemilinearSpec::linear(t.number("slope", -1.0));
  return SemilinearSpec::gradient_coupled();
}

// Experiments. Each fills `results` and returns its checks.

struct Context {
  ConfigReader& cfg;
  std::uint64_t seed;
  int threads;
  nlohmann::json results = nlohmann::json::object();
  nlohmann::json provenance = nlohmann::json::object();
  std::function<void(std::ostream&)> samples_csv;
  std::function<void(std::ostream&)> field_csv;
};

inline std::vector<Check> run_verify_geometry(Context& c) {
  const auto M = read_manifold(c.cfg);
  auto t = c.cfg.table("geometry");
  const int n = static_cast<int>(t.integer("n_pairs", 50, 1, 100'000));
  const int frames = static_cast<int>(t.integer("n_frames", 100, 1, 100'000));
  c.provenance["manifold"] = M.describe();
  auto checks = verify_geometry(M, n, c.seed);
  const auto tr = transfer_stats(M, frames, c.seed + 1);
  checks.push_back(make_check("transfer_cos_deviation", tr.cos_deviation, Relation::below, t.number("tol_transfer", 1e-12, 0.0)));
  checks.push_back(make_check("transfer_max_entry", tr.max_entry, Relation::at_most, 1.0));
  c.results = {{"n_pairs", n}, {"n_frames", frames}};
  return checks;
}

inline std::vector<Check> run_verify_jacobi(Context& c) {
  const auto M = read_manifold(c.cfg);
  auto t = c.cfg.table("jacobi");
  const int n = static_cast<int>(t.integer("n_pairs", 20, 1, 10'000));
  const int n_oracle = static_cast<int>(t.integer("n_oracle", 400, 20, 100'000));
  const double tol = t.number("tol", 1e-8, 0.0);
  c.provenance["manifold"] = M.describe();
  const double dev = jacobi_oracle_deviation(M, n, c.seed, n_oracle);
  c.results = {{"n_pairs", n}, {"n_oracle", n_oracle}, {"sup_deviation", dev}};
  return {make_check("jacobi_vs_bvp_oracle", dev, Relation::below, tol)};
}

inline std::vector<Check> run_verify_kfields(Context& c) {
  const auto M = read_manifold(c.cfg);
  auto t = c.cfg.table("kfields");
  const int n = static_cast<int>(t.integer("n_pairs", 3, 1, 1000));
  const auto steps = t.numbers("steps", {1e-2, 5e-3, 2.5e-3}, 1e-8, 0.5);
  const int n_ode = static_cast<int>(t.integer("n_ode", 800, 20, 100'000));
  const int n_fd = static_cast<int>(t.integer("n_fd", 80, 2, 100'000));
  const double lo = t.number("min_distance", 0.2, 0.0), hi = t.number("max_distance", safe_distance(M), 0.0);
  const double tol_ode = t.number("tol_ode", 1e-8, 0.0), tol_ext = t.number("tol_extrapolated", 1e-6, 0.0);
  const double tol_odd = t.number("tol_oddness", 1e-8, 0.0), tol_id = t.number("tol_identity", 1e-6, 0.0);
  const double min_order = t.number("min_order", 1.9, 0.0);
  if (steps.size() < 2) t.fail("steps", "at least two FD steps are required");
  for (std::size_t i = 0; i + 1 < steps.size(); ++i)
    if (std::abs(steps[i] / steps[i + 1] - 2.0) > 1e-12) t.fail("steps", "the FD ladder must halve");
  if (n_ode % n_fd != 0 || n_ode % 2 != 0 || n_fd % 2 != 0) t.fail("n_fd", "n_ode and n_fd must be even, n_fd dividing n_ode");
  if (!(lo < hi)) t.fail("min_distance", "must be below max_distance");
  c.provenance["manifold"] = M.describe();

  std::mt19937_64 rng(c.seed);
  std::vector<Check> checks;
  auto& pairs = c.results["pairs"] = nlohmann::json::array();
  double ode = 0, ext = 0, odd = 0, id = 0;
  for (int i = 0; i < n; ++i) {
    const auto [x, y] = random_pair(M, rng, lo, hi);
    const auto s = kfield_stats(M, x, y, steps, n_ode, n_fd);
    auto order = fd_order_check(s, min_order);
    order.name = "pair" + std::to_string(i) + "." + order.name;
    checks.push_back(order);
    std::vector<double> mid_slopes, dev_slopes;
    for (std::size_t k = 0; k + 1 < steps.size(); ++k) {
      const double r = steps[k] / steps[k + 1];
      mid_slopes.push_back(KFieldStats::slope(s.fd_midpoint[k], s.fd_midpoint[k + 1], r));
      dev_slopes.push_back(KFieldStats::slope(s.fd_vs_ode[k], s.fd_vs_ode[k + 1], r));
    }
    auto finite_or_null = [](const std::vector<double>& v) {
      nlohmann::json a = nlohmann::json::array();
      for (double x : v) a.push_back(std::isfinite(x) ? nlohmann::json(x) : nlohmann::json());
      return a;
    };
    pairs.push_back({{"distance", distance(M, x, y)},
                     {"ode_midpoint", s.ode_midpoint},
                     {"fd_midpoint", s.fd_midpoint},
                     {"fd_midpoint_slopes", finite_or_null(mid_slopes)},
                     {"fd_vs_ode", s.fd_vs_ode},
                     {"fd_vs_ode_slopes", finite_or_null(dev_slopes)},
                     {"extrapolated", s.extrapolated},
                     {"oddness", s.oddness},
                     {"identity_residual", s.identity},
                     {"max_c_off_velocity", s.sphere_like_c},
                     {"max_transverse_k", s.transverse_k},
                     {"order_check", order.name}});
    ode = std::max(ode, s.ode_midpoint);
    ext = std::max(ext, s.extrapolated);
    odd = std::max(odd, s.oddness);
    id = std::max(id, s.identity);
  }
  c.results["steps"] = steps;
  checks.push_back(make_check("ode_midpoint", ode, Relation::below, tol_ode));
  checks.push_back(make_check("fd_extrapolated_midpoint", ext, Relation::below, tol_ext));
  checks.push_back(make_check("oddness", odd, Relation::below, tol_odd));
  checks.push_back(make_check("identity_residual", id, Relation::below, tol_id));
  return checks;
}

inline double closed_form_torsion(const DomainSpec& d, const Point& p) {
  switch (d.kind()) {
    case DomainKind::interval: return 0.5 * (d.half_length() * d.half_length() - p.coords[0] * p.coords[0]);
    case DomainKind::disk: {
      const double r = d.point_to_chart(p)[0];
      return 0.25 * (d.radius() * d.radius() - r * r);
    }
    default: {
      const double k = d.kappa(), r = d.point_to_chart(p)[0];
      return (2 / k) * (std::log(std::cos(std::sqrt(k) * r / 2)) - std::log(std::cos(std::sqrt(k) * d.radius() / 2)));
    }
  }
}

inline std::vector<Check> run_solve(Context& c) {
  const auto d = read_domain(c.cfg);
  const auto field = read_field(c.cfg, d, c.provenance);
  if (!c.provenance.contains("solver")) throw ConfigError("field.equation: solve needs a PDE, not a manufactured field");
  const auto& u = dynamic_cast<const ScalarField&>(*field);
  const auto eq = u.provenance().equation;
  c.provenance["domain"] = d.describe();
  c.results["field"] = field_header_json(u);
  c.results["min"] = u.values().minCoeff();
  c.results["max"] = u.values().maxCoeff();
  c.field_csv = [field](std::ostream& os) { write_field_csv(os, dynamic_cast<const ScalarField&>(*field)); };

  std::vector<Check> checks;
  auto st = c.cfg.table("solve");
  if (eq == "torsion" && (d.kind() == DomainKind::interval || d.kind() == DomainKind::disk || d.kind() == DomainKind::cap)) {
    double err = 0.0;
    for (int k = 0; k < u.grid().size(); ++k)
      err = std::max(err, std::abs(u.values()[k] - closed_form_torsion(d, u.grid().point(k))));
    c.results["max_error_vs_closed_form"] = err;
    if (st.has("max_error")) checks.push_back(make_check("closed_form_error", err, Relation::below, st.number("max_error", 0.0, 0.0)));
  }
  auto pt = c.cfg.table("perturbation");
  if (pt.has("eps")) {
    const auto eps = pt.numbers("eps", {}, 0.0);
    const double shrink = pt.number("shrink", 0.1, 0.0);
    const double factor = pt.number("max_ratio_spread", 2.0, 1.0);
    if (!u.provenance().b) pt.fail("eps", "perturbation needs a solved field");
    const ChartGrid inner(d.shrink(shrink), GridSpec{u.grid().spec()});
    const auto ratios = perturbation_ratios(inner, *u.provenance().b, eps, u);
    const double spread = *std::max_element(ratios.begin(), ratios.end()) / *std::min_element(ratios.begin(), ratios.end());
    c.results["perturbation"] = {{"eps", eps}, {"shrink", shrink}, {"ratios", ratios}, {"spread", spread}};
    checks.push_back(make_check("perturbation_ratio_spread", spread, Relation::at_most, factor));
  }
  if (checks.empty()) checks.push_back(make_check("solver_residual", c.provenance["solver"]["residual"].get<double>(), Relation::below, 1e-8));
  return checks;
}

inline std::vector<Check> scan_checks(const ConcavityReport& r) {
  std::vector<Check> checks{make_check("min_Z", r.min_Z, Relation::at_least, -r.tol_Z)};
  if (r.boundary.status != BoundaryStatus::not_checked)
    checks.push_back(make_check("boundary_condition_margin", r.boundary.worst_margin, Relation::above, 0.0));
  return checks;
}

inline std::vector<Check> run_scan(Context& c) {
  const auto d = read_domain(c.cfg);
  const auto u = read_field(c.cfg, d, c.provenance);
  const auto cfg = read_scan(c.cfg, c.seed, c.threads);
  c.provenance["domain"] = d.describe();
  auto rep = std::make_shared<ConcavityReport>(scan_min(*u, cfg));
  c.results = to_json(*rep, d);
  c.samples_csv = [rep, d](std::ostream& os) { write_samples_csv(os, *rep, d); };
  return scan_checks(*rep);
}

inline std::vector<Check> run_chain_audit(Context& c) {
  const auto d = read_domain(c.cfg);
  const auto u = read_field(c.cfg, d, c.provenance);
  auto cfg = read_scan(c.cfg, c.seed, c.threads);
  auto t = c.cfg.table("chain");
  const auto f = read_f(t, "f", "neg_trace");
  const int count = static_cast<int>(t.integer("pairs", 10, 1, 10'000));
  const double tol = t.number("tol_slack", 1e-5, 0.0);
  if (!u->provenance().b) t.fail("pairs", "the chain audit needs a field that solves a semilinear equation");
  cfg.f = f;
  c.provenance["domain"] = d.describe();
  auto rep = std::make_shared<ConcavityReport>(scan_min(*u, cfg));
  const double margin = std::max(cfg.exclusion_factor * u->resolution(), rep->trust_collar);
  const auto low = lowest_interior_pairs(*rep, d, margin, count);
  auto& audits = c.results["audits"] = nlohmann::json::array();
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& s : low) {
    const auto a = chain_audit(*u, s.x, s.y, f, *u->provenance().b);
    nlohmann::json sl;
    for (std::size_t i = 0; i < 7; ++i) sl[chain_step_names()[i]] = a.slacks[i];
    audits.push_back({{"pair", to_json(s, d)}, {"expressions", a.expressions}, {"slacks", sl}, {"min_slack", a.min_slack()}});
    worst = std::min(worst, a.min_slack());
  }
  c.results["scan"] = to_json(*rep, d);
  c.results["margin"] = margin;
  c.samples_csv = [rep, d](std::ostream& os) { write_samples_csv(os, *rep, d); };
  if (low.empty()) return {make_check("audited_pairs", 0.0, Relation::at_least, 1.0)};
  return {make_check("chain_min_slack", worst, Relation::at_least, -tol)};
}

inline std::vector<Check> run_parabolic_scan(Context& c) {
  const auto d = read_domain(c.cfg);
  auto t = c.cfg.table("parabolic");
  const auto init = t.string("initial", "exp_square", {"exp_square", "exp_neg_cos", "constant"});
  const double T = t.number("T", 0.5, 0.0);
  const int steps = static_cast<int>(t.integer("steps", 50, 1, 100'000));
  const int sign = static_cast<int>(t.integer("log_sign", -1, -1, 1));
  if (sign == 0) t.fail("log_sign", "must be 1 or -1");
  const auto g = read_grid(c.cfg, d);
  const auto cfg = read_scan(c.cfg, c.seed, c.threads);
  c.provenance["domain"] = d.describe();
  c.provenance["grid"] = grid_json(g);
  const auto u0 = ScalarField::sample(g, [&](const Point& p) {
    if (init == "constant") return 2.0;
    if (init == "exp_square") return std::exp(p.coords[0] * p.coords[0]);
    return std::exp(-std::cos(std::sqrt(d.kappa()) * d.point_to_chart(p)[0]));
  });
  HeatOptions opt;
  opt.require_positive = true;
  const auto series = solve_heat(u0, T, steps, opt);
  const auto rep = std::make_shared<ParabolicReport>(parabolic_scan(log_transform(series, sign), cfg));
  auto& snaps = c.results["snapshots"] = nlohmann::json::array();
  std::size_t worst = 0;
  for (std::size_t i = 0; i < rep->snapshots.size(); ++i) {
    const auto& s = rep->snapshots[i];
    snaps.push_back({{"t", rep->times[i]},
                     {"min_Z", s.min_Z},
                     {"verdict", to_string(s.verdict)},
                     {"boundary_condition", to_string(s.boundary.status)}});
    if (s.min_Z < rep->snapshots[worst].min_Z) worst = i;
  }
  c.results["min_Z_over_time"] = rep->min_Z_over_time;
  c.results["initial_concave"] = rep->initial_concave;
  c.results["preserved"] = rep->preserved ? nlohmann::json(*rep->preserved) : nlohmann::json();
  c.results["worst_snapshot"] = to_json(rep->snapshots[worst], d);
  c.samples_csv = [rep, d, worst](std::ostream& os) { write_samples_csv(os, rep->snapshots[worst], d); };
  return {make_check("initial_data_concave", rep->initial_concave ? 1.0 : 0.0, Relation::at_least, 1.0),
          make_check("min_Z_over_time", rep->min_Z_over_time, Relation::at_least, -cfg.tol_Z)};
}

inline nlohmann::json property_json(const PropertyReport& r) {
  nlohmann::json j;
  j["passed"] = r.passed;
  for (const auto& c : r.checks) {
    j["checks"][c.name]["passed"] = c.passed;
    if (!c.witness.empty()) j["checks"][c.name]["witness"] = c.witness;
  }
  return j;
}

inline std::vector<Check> run_check_hypotheses(Context& c) {
  auto t = c.cfg.table("hypotheses");
  const int n = static_cast<int>(t.integer("samples", 500, 1, 1'000'000));
  std::vector<Check> checks;
  if (t.has("f")) {
    const auto f = read_f(t, "f", "neg_trace");
    const int dim = static_cast<int>(t.integer("dim", f.weights.empty() ? 2 : static_cast<std::int64_t>(f.weights.size()), 1, 64));
    const auto rep = check_f_properties(f, dim, n, c.seed);
    c.results["f"] = property_json(rep);
    c.results["f"]["name"] = f.name();
    for (const auto& pc : rep.checks) checks.push_back(make_check("f." + pc.name, pc.passed ? 1.0 : 0.0, Relation::at_least, 1.0));
  }
  if (t.has("b")) {
    const auto b = read_b(t);
    const auto rep = check_b_properties(b, n, c.seed);
    c.results["b"] = property_json(rep);
    c.results["b"]["name"] = b.name();
    c.results["b"]["strict"] = rep.strict;
    c.results["b"]["metadata_consistent"] = rep.metadata_consistent;
    for (const auto& pc : rep.checks) {
      if (pc.name == "strictly_decreasing_in_u") continue;  // informational
      checks.push_back(make_check("b." + pc.name, pc.passed ? 1.0 : 0.0, Relation::at_least, 1.0));
    }
    checks.push_back(make_check("b.metadata_consistent", rep.metadata_consistent ? 1.0 : 0.0, Relation::at_least, 1.0));
  }
  if (checks.empty()) t.fail("f", "name an f, a b, or both");
  return checks;
}

// Reports.

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

/// Hash of the report without its timestamp and hash fields.
inline std::string report_hash(nlohmann::json report) {
  report.erase("timestamp");
  report.erase("report_hash");
  return hex64(fnv1a(report.dump()));
}

inline std::string config_hash(const nlohmann::json& config, const std::string& experiment, std::uint64_t seed) {
  return hex64(fnv1a(nlohmann::json{{"config", config}, {"experiment", experiment}, {"seed", seed}}.dump()));
}

/// Runs one experiment on a parsed config and writes its files into `out`.
/// Config and domain errors map to exit 2; failed checks and solver
/// failures map to exit 1.
inline RunResult run(const std::string& experiment, const nlohmann::json& config, std::optional<std::uint64_t> seed_override,
                     const std::filesystem::path& out) {
  RunResult res;
  try {
    if (std::find(experiments().begin(), experiments().end(), experiment) == experiments().end())
      throw ConfigError("unknown experiment '" + experiment + "'");
    ConfigReader cfg(config);
    auto root = cfg.root();
    const auto named = root.string("experiment", experiment);
    if (named != experiment)
      throw ConfigError("config is for experiment '" + named + "', not '" + experiment + "'");
    const auto cfg_seed = static_cast<std::uint64_t>(root.integer("seed", 1, 0));
    const std::uint64_t seed = seed_override.value_or(cfg_seed);
    const int threads = static_cast<int>(root.integer("threads", 0, 0, 1024));
    auto ot = cfg.table("output");
    const bool want_samples = ot.boolean("samples_csv", true);
    const bool want_field = ot.boolean("field_csv", experiment == "solve");

    Context ctx{cfg, seed, threads};
    static const std::map<std::string, std::vector<Check> (*)(Context&)> table{
        {"verify-geometry", run_verify_geometry}, {"verify-jacobi", run_verify_jacobi},
        {"verify-kfields", run_verify_kfields},   {"solve", run_solve},
        {"scan", run_scan},                       {"parabolic-scan", run_parabolic_scan},
        {"chain-audit", run_chain_audit},         {"check-hypotheses", run_check_hypotheses}};
    const auto checks = table.at(experiment)(ctx);
    cfg.finish();

    auto& r = res.report;
    r["schema_version"] = kSchemaVersion;
    r["experiment"] = experiment;
    r["seed"] = seed;
    r["config"] = config;
    r["config_hash"] = config_hash(config, experiment, seed);
    r["provenance"] = ctx.provenance;
    r["results"] = ctx.results;
    r["checks"] = nlohmann::json::array();
    std::vector<std::string> failed;
    for (const auto& ch : checks) {
      r["checks"].push_back(to_json(ch));
      if (!ch.passed) failed.push_back(ch.name);
    }
    r["failed_checks"] = failed;
    r["passed"] = failed.empty();
    r["report_hash"] = report_hash(r);
    r["timestamp"] = utc_timestamp();
    res.exit_code = failed.empty() ? kExitPass : kExitTolerance;

    std::filesystem::create_directories(out);
    std::ofstream(out / "report.json") << r.dump(2) << '\n';
    if (want_samples && ctx.samples_csv) {
      std::ofstream os(out / "samples.csv");
      ctx.samples_csv(os);
    }
    if (want_field && ctx.field_csv) {
      std::ofstream os(out / "field.csv");
      ctx.field_csv(os);
    }
  } catch (const ConfigError& e) {
    res.exit_code = kExitConfig;
    res.error = e.what();
  } catch (const DomainViolation& e) {
    res.exit_code = kExitConfig;
    res.error = e.what();
  } catch (const Error& e) {
    res.exit_code = kExitTolerance;
    res.error = e.what();
  }
  return res;
}

/// One-screen summary of a report.
inline std::string summary(const nlohmann::json& report) {
  std::ostringstream os;
  os << report["experiment"].get<std::string>() << "  seed " << report["seed"] << "  config "
     << report["config_hash"].get<std::string>() << "\n";
  os << std::left << std::setw(44) << "check" << std::setw(14) << "value" << std::setw(4) << "" << std::setw(12)
     << "bound" << "result\n";
  for (const auto& c : report["checks"]) {
    std::ostringstream v, b;
    v << std::setprecision(4) << c["value"].get<double>();
    b << std::setprecision(4) << c["bound"].get<double>();
    os << std::setw(44) << c["name"].get<std::string>() << std::setw(14) << v.str() << std::setw(4)
       << c["relation"].get<std::string>() << std::setw(12) << b.str() << (c["passed"].get<bool>() ? "PASS" : "FAIL")
       << "\n";
  }
  const auto& r = report["results"];
  if (r.contains("verdict")) os << "verdict: " << r["verdict"].get<std::string>() << "\n";
  os << (report["passed"].get<bool>() ? "all checks passed" : "FAILED") << "\n";
  return os.str();
}

}  // namespace tpc::cli
