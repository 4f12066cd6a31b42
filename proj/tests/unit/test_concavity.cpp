#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "support/oracles.hpp"
#include "tpc/concavity.hpp"
#include "tpc/pde.hpp"

using namespace tpc;

namespace {

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }

const DomainSpec square = DomainSpec::rectangle(-1, 1, -1, 1);

ScalarField sampled(const DomainSpec& d, int n, const std::function<double(const Point&)>& f) {
  return ScalarField::sample(ChartGrid(d, {n}), f);
}

ScanConfig small_scan(int n_pairs = 2000) {
  ScanConfig c;
  c.n_pairs = n_pairs;
  c.boundary_pairs = 200;
  return c;
}

std::shared_ptr<const AnalyticField> cap_torsion_exact(double r0) {
  const auto d = DomainSpec::cap(r0, 1.0);
  return std::make_shared<AnalyticField>(
      d, [d, r0](const Point& p) { return tpc::testing::cap_torsion_radial(d.point_to_chart(p)[0], r0, 1.0); });
}

}  // namespace

TEST(TwoPoint, DiagonalIsExactlyZero) {
  const auto u = sampled(square, 16, [](const Point& p) { return std::sin(p.coords[0]) + p.coords[1]; });
  const Point x{v2(0.3, -0.2)};
  const auto s = z_value(u, x, x);
  EXPECT_EQ(s.Z, 0.0);
  EXPECT_EQ(s.classification, PairClass::diagonal);
}

TEST(TwoPoint, QuadraticAndAffineValues) {
  const auto q = sampled(square, 16, [](const Point& p) { return -0.5 * p.coords.squaredNorm(); });
  const auto a = sampled(square, 16, [](const Point& p) { return 2 * p.coords[0] - p.coords[1] + 1; });
  std::mt19937_64 rng(5);
  for (int k = 0; k < 100; ++k) {
    const Point x = square.sample(rng), y = square.sample(rng);
    EXPECT_NEAR(z_value(q, x, y).Z, (x.coords - y.coords).squaredNorm() / 8, 1e-12);
    EXPECT_NEAR(z_value(a, x, y).Z, 0.0, 1e-12);
  }
}

TEST(TwoPoint, SymmetricAndMidpointExact) {
  const auto d = DomainSpec::cap(1.2, 1.0);
  const auto u = solve_torsion(ChartGrid(d, {32}));
  std::mt19937_64 rng(11);
  for (int k = 0; k < 200; ++k) {
    const Point x = d.sample(rng), y = d.sample(rng);
    const auto s = z_value(u, x, y), t = z_value(u, y, x);
    EXPECT_NEAR(s.Z, t.Z, 1e-12);
    EXPECT_LT(distance(d.manifold(), s.z, connect(d.manifold(), x, y).at(0.0)), 1e-10);
  }
}

TEST(Scan, TorsionIntervalIsConcave) {
  const auto u = solve_torsion(ChartGrid(DomainSpec::interval(1.0), {64}));
  ScanConfig cfg;
  const auto r = scan_min(u, cfg);
  EXPECT_GE(r.min_Z, -1e-8);
  EXPECT_EQ(r.verdict, Verdict::concave_certified_numerically);
  EXPECT_EQ(r.boundary.status, BoundaryStatus::holds);
  EXPECT_GT(r.boundary.worst_margin, 0.0);
  EXPECT_GT(r.n_samples, 9000);
}

TEST(Scan, SaddleIsViolation) {
  const auto u = sampled(square, 32, [](const Point& p) { return p.coords[0] * p.coords[0] - p.coords[1] * p.coords[1]; });
  const auto r = scan_min(u, small_scan());
  EXPECT_EQ(r.verdict, Verdict::violation_found);
  EXPECT_LT(r.min_Z, -0.9);  // infimum -1 at opposite points of the x edges
  EXPECT_EQ(r.boundary.status, BoundaryStatus::violated);
}

TEST(Scan, DeterministicAcrossRunsAndThreads) {
  const auto u = solve_torsion(ChartGrid(DomainSpec::disk(1.0), {16}));
  auto cfg = small_scan(1000);
  cfg.seed = 42;
  cfg.threads = 1;
  const auto a = to_json(scan_min(u, cfg), u.domain()).dump();
  cfg.threads = 4;
  const auto b = to_json(scan_min(u, cfg), u.domain()).dump();
  EXPECT_EQ(a, b);
  cfg.seed = 43;
  EXPECT_NE(a, to_json(scan_min(u, cfg), u.domain()).dump());
}

TEST(Scan, SparseSamplingIsInconclusive) {
  const auto u = solve_torsion(ChartGrid(DomainSpec::interval(1.0), {16}));
  auto cfg = small_scan(20);
  const auto r = scan_min(u, cfg);
  EXPECT_EQ(r.verdict, Verdict::inconclusive);
}

TEST(Scan, TrustCollarShrinksScanRegion) {
  const auto d = DomainSpec::interval(1.0);
  const auto u = solve_liouville(ChartGrid(d, {400}), 1.0, 1.0);
  const auto r = scan_min(u, small_scan());
  EXPECT_EQ(r.trust_collar, 5 * u.grid().h());
  for (const auto& s : r.samples) {
    EXPECT_GE(d.dist_to_boundary(s.x), r.trust_collar - 1e-12);
    EXPECT_GE(d.dist_to_boundary(s.y), r.trust_collar - 1e-12);
  }
  EXPECT_EQ(r.boundary.status, BoundaryStatus::not_checked);
  EXPECT_EQ(r.boundary.reason, "growth_condition");
}

TEST(Boundary, ConstantFieldHasZeroMargin) {
  const auto u = sampled(DomainSpec::disk(1.0), 16, [](const Point&) { return 2.0; });
  const auto b = boundary_condition_check(u, 200);
  EXPECT_EQ(b.status, BoundaryStatus::violated);
  EXPECT_NEAR(b.worst_margin, 0.0, 1e-12);
}

TEST(Boundary, TorsionMarginMatchesExplicitSolution) {
  // u = (1 - x^2) / 2, x = -1: margin = (y + 1)^2 / 2.
  const auto u = solve_torsion(ChartGrid(DomainSpec::interval(1.0), {32}));
  const Point x{Vec::Constant(1, -1.0)}, y{Vec::Constant(1, 0.5)};
  const auto seg = connect(u.domain().manifold(), x, y);
  const auto& M = u.domain().manifold();
  const double margin = metric_inner(M, covariant_gradient(u, x), seg.velocity(-1.0)) -
                        metric_inner(M, covariant_gradient(u, y), seg.velocity(1.0));
  EXPECT_NEAR(margin, 1.5 * 1.5 / 2, 1e-12);
}

TEST(FirstOrder, FlatCriticalPairsAlignGradients) {
  const auto u = sampled(square, 16, [](const Point& p) { return -0.5 * p.coords[0] * p.coords[0]; });
  const Point x{v2(0.3, -0.6)}, y{v2(0.3, 0.7)};  // Z = 0 is minimal along x1 = y1
  const auto r = first_order_check(u, x, y);
  EXPECT_LT(r.residual_x, 1e-8);
  EXPECT_LT(r.residual_y, 1e-8);
  EXPECT_TRUE(r.contracting(1e-12));
  EXPECT_LT(r.norm_gap(), 1e-8);
}

TEST(FirstOrder, CapRadialPairAppliesTransfer) {
  // On a cap the radial torsion profile gives a symmetric pair through the
  // pole whose midpoint gradient vanishes, so only the symmetric residual
  // is informative; V must stay a contraction.
  const auto u = cap_torsion_exact(1.2);
  const auto& d = u->domain();
  const Point x = d.chart_to_point(v2(0.5, 0.0)), y = d.chart_to_point(v2(0.5, std::numbers::pi));
  const auto r = first_order_check(*u, x, y);
  EXPECT_NEAR(r.norm_x, r.norm_y, 1e-8);
  EXPECT_LT(r.norm_z, 1e-8);
  EXPECT_TRUE(r.contracting(1e-10));
}

TEST(SecondOrder, ConcaveQuadraticFlat) {
  Mat H(2, 2);
  H << -2, 0.5, 0.5, -1;
  const auto u = sampled(square, 16, [&](const Point& p) { return 0.5 * p.coords.dot(H * p.coords); });
  const Point x{v2(-0.4, 0.1)}, y{v2(0.5, 0.3)};
  const auto r = second_order_check(u, x, y);
  EXPECT_LT(r.D1.norm(), 1e-9);
  EXPECT_NEAR(r.min_eig_D2, sorted_eigenvalues(-2 * H)[0], 1e-9);
}

TEST(HessianZ, FlatQuadraticMatchesAssembly) {
  Mat H(2, 2);
  H << -2, 0.5, 0.5, -1;
  const auto u = sampled(square, 16, [&](const Point& p) { return 0.5 * p.coords.dot(H * p.coords); });
  const Point x{v2(-0.4, 0.1)}, y{v2(0.5, 0.3)};
  const auto so = second_order_check(u, x, y);
  const Vec xi = v2(0.6, -0.8);
  // Z is quadratic, so the second difference is exact up to roundoff.
  EXPECT_NEAR(hessian_z_fd(u, x, y, xi, xi, 1e-2), xi.dot(so.D1 * xi), 1e-9);
  EXPECT_NEAR(hessian_z_fd(u, x, y, xi, -xi, 1e-2), 0.5 * xi.dot(so.D2 * xi), 1e-9);
}

TEST(HessianZ, CapMatchesAssembly) {
  const auto u = cap_torsion_exact(1.2);
  const auto& d = u->domain();
  std::mt19937_64 rng(21);
  const auto inner = d.shrink(0.2);
  for (int k = 0; k < 10; ++k) {
    const Point x = inner.sample(rng), y = inner.sample(rng);
    if (distance(d.manifold(), x, y) < 0.2) continue;
    const auto frame = build_frame(connect(d.manifold(), x, y));
    const Vec V = transfer_matrix(frame).entries;
    const auto so = second_order_check(*u, x, y);
    const Vec xi = v2(std::cos(0.3 * k), std::sin(0.3 * k));
    const Vec a = V.cwiseProduct(xi);
    EXPECT_NEAR(hessian_z_fd(*u, x, y, a, a, 1e-3), xi.dot(so.D1 * xi), 1e-4);
    EXPECT_NEAR(hessian_z_fd(*u, x, y, xi, -xi, 1e-3), 0.5 * xi.dot(so.D2 * xi), 1e-4);
  }
}

TEST(Chain, AffineFlatHasZeroSlack) {
  const auto u = sampled(square, 16, [](const Point& p) { return 0.7 * p.coords[0] - 0.2 * p.coords[1]; });
  const auto c = chain_audit(u, Point{v2(-0.5, 0.2)}, Point{v2(0.6, -0.1)}, IsotropicFSpec::neg_trace(),
                             SemilinearSpec::constant(0.0));
  for (double s : c.slacks) EXPECT_NEAR(s, 0.0, 1e-12);
}

TEST(Chain, TorsionIntervalNearMinPairs) {
  const auto u = solve_torsion(ChartGrid(DomainSpec::interval(1.0), {64}));
  const auto r = scan_min(u, small_scan());
  const auto pairs = lowest_interior_pairs(r, u.domain(), 2 * u.grid().h(), 10);
  ASSERT_EQ(pairs.size(), 10u);
  for (const auto& s : pairs)
    EXPECT_GE(chain_audit(u, s.x, s.y, IsotropicFSpec::neg_trace(), SemilinearSpec::constant(1.0)).min_slack(), -1e-6);
}

TEST(Chain, InconsistentSpecsRejected) {
  const auto u = solve_torsion(ChartGrid(DomainSpec::interval(1.0), {16}));
  const Point x{Vec::Constant(1, -0.3)}, y{Vec::Constant(1, 0.4)};
  EXPECT_THROW(chain_audit(u, x, y, IsotropicFSpec::neg_trace(), SemilinearSpec::liouville(1, 1)), ConfigError);
  EXPECT_THROW(chain_audit(u, x, y, IsotropicFSpec::trace_exp(), SemilinearSpec::constant(1.0)), ConfigError);
}

TEST(Jensen, CertifiedFieldHasNonpositiveSecondDifferences) {
  const auto d = DomainSpec::disk(1.0);
  const auto u = solve_torsion(ChartGrid(d, {24}));
  ASSERT_EQ(scan_min(u, small_scan()).verdict, Verdict::concave_certified_numerically);
  std::mt19937_64 rng(8);
  for (int k = 0; k < 1000; ++k) {
    const Point x = d.sample(rng), y = d.sample(rng);
    if (same_point(x, y)) continue;
    EXPECT_LE(geodesic_second_difference(u, x, y, 0.5), 1e-8);
  }
}

TEST(Parabolic, ConstantSeriesHasZeroZ) {
  const ChartGrid g(DomainSpec::interval(1.0), {32});
  const auto s = solve_heat(ScalarField::sample(g, [](const Point&) { return 2.0; }), 0.5, 5);
  const auto r = parabolic_scan(log_transform(s, -1), small_scan(500));
  for (const auto& snap : r.snapshots) EXPECT_NEAR(snap.min_Z, 0.0, 1e-12);
}

TEST(Parabolic, LogConvexityLossComesWithBoundaryViolation) {
  // Fixed Dirichlet data force u_xx = 0 on the boundary for t > 0, so -log u
  // turns convex there; the scan must attribute every defect to the
  // boundary hypothesis failing.
  const ChartGrid g(DomainSpec::interval(1.0), {128});
  const auto s = solve_heat(ScalarField::sample(g, [](const Point& p) { return std::exp(p.coords[0] * p.coords[0]); }), 0.5, 50);
  const auto r = parabolic_scan(log_transform(s, -1), small_scan(1000));
  EXPECT_TRUE(r.initial_concave);
  ASSERT_TRUE(r.preserved.has_value());
  for (const auto& snap : r.snapshots)
    if (snap.min_Z < -snap.tol_Z) EXPECT_EQ(snap.boundary.status, BoundaryStatus::violated);
}

TEST(Parabolic, DefectiveInitialDataSkipsPreservationClaim) {
  const ChartGrid g(DomainSpec::interval(1.0), {64});
  const auto s = solve_heat(ScalarField::sample(g, [](const Point& p) { return std::exp(-p.coords[0] * p.coords[0]); }), 0.1, 5);
  const auto r = parabolic_scan(log_transform(s, -1), small_scan(500));
  EXPECT_EQ(r.snapshots.front().verdict, Verdict::violation_found);
  EXPECT_FALSE(r.initial_concave);
  EXPECT_FALSE(r.preserved.has_value());
}

TEST(Export, JsonAndCsvCarryReport) {
  const auto u = solve_torsion(ChartGrid(DomainSpec::disk(1.0), {16}));
  const auto r = scan_min(u, small_scan(300));
  const auto j = to_json(r, u.domain());
  for (const char* key : {"min_Z", "argmin", "verdict", "refinement_trace", "boundary_condition", "first_order",
                          "second_order", "chain_audit"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j["chain_audit"]["slacks"].size(), 7u);
  std::ostringstream os;
  write_samples_csv(os, r, u.domain());
  const std::string csv = os.str();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "x_r,x_theta,y_r,y_theta,Z,classification");
  EXPECT_EQ(static_cast<int>(std::count(csv.begin(), csv.end(), '\n')), r.n_samples + 1);
}
