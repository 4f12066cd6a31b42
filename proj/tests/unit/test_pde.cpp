#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "support/oracles.hpp"
#include "tpc/pde.hpp"

using namespace tpc;
using namespace tpc::testing;

namespace {

double sup_error(const ScalarField& f, const std::function<double(const Point&)>& exact) {
  double e = 0.0;
  for (int k = 0; k < f.grid().size(); ++k) e = std::max(e, std::abs(f.values()[k] - exact(f.grid().point(k))));
  return e;
}

double radius_of(const DomainSpec& d, const Point& p) { return d.point_to_chart(p)[0]; }

}  // namespace

TEST(Torsion, IntervalIsExact) {
  const auto d = DomainSpec::interval(1.5);
  SolveInfo info;
  const auto u = solve_torsion(ChartGrid(d, {40}), &info);
  EXPECT_LT(info.residual, 1e-10);
  EXPECT_LT(sup_error(u, [](const Point& p) { return (2.25 - p.coords[0] * p.coords[0]) / 2; }), 1e-12);
}

TEST(Torsion, DiskIsExact) {
  const auto d = DomainSpec::disk(1.3);
  const auto u = solve_torsion(ChartGrid(d, {32}));
  EXPECT_LT(sup_error(u, [](const Point& p) { return (1.69 - p.coords.squaredNorm()) / 4; }), 1e-10);
}

TEST(Torsion, PositiveInside) {
  for (const auto& d : {DomainSpec::cap(1.2, 1.0), DomainSpec::product(DomainSpec::cap(1.2, 1.0), 0.8),
                        DomainSpec::rectangle(-1, 1, 0, 1)}) {
    const ChartGrid g(d, {16});
    const auto u = solve_torsion(g);
    for (int k = 0; k < g.size(); ++k)
      if (g.role(k) != NodeRole::dirichlet) EXPECT_GT(u.values()[k], 0.0);
  }
}

TEST(Torsion, CapMatchesRadialOracleAfterExtrapolation) {
  const double r0 = 1.2;
  const auto d = DomainSpec::cap(r0, 1.0);
  const auto coarse = solve_torsion(ChartGrid(d, {64, 8}));
  const auto fine = solve_torsion(ChartGrid(d, {128, 8}));
  double worst = 0.0, raw = 0.0;
  for (int i = 0; i <= 64; ++i) {
    const double r = i * r0 / 64;
    const double exact = cap_torsion_radial(r, r0, 1.0);
    const double c = coarse.values()[coarse.grid().index({i, 0, 0})];
    const double f = fine.values()[fine.grid().index({2 * i, 0, 0})];
    raw = std::max(raw, std::abs(f - exact));
    worst = std::max(worst, std::abs(richardson(c, f) - exact));
  }
  EXPECT_LT(worst, 1e-6);
  EXPECT_LT(raw, 1e-3);
}

TEST(Poisson, ManufacturedConvergence) {
  struct Case {
    DomainSpec d;
    std::function<double(const Point&)> u, rhs;
  };
  const std::vector<Case> cases{
      {DomainSpec::interval(1.0), [](const Point& p) { return std::sin(2 * p.coords[0]); },
       [](const Point& p) { return 4 * std::sin(2 * p.coords[0]); }},
      {DomainSpec::disk(1.0), [](const Point& p) { return std::exp(p.coords[0]) * std::cos(2 * p.coords[1]); },
       [](const Point& p) { return 3 * std::exp(p.coords[0]) * std::cos(2 * p.coords[1]); }},
      // Height function on the unit sphere: -Lap z = 2 z.
      {DomainSpec::cap(1.2, 1.0), [](const Point& p) { return p.coords[0] + p.coords[2]; },
       [](const Point& p) { return 2 * (p.coords[0] + p.coords[2]); }},
  };
  for (const auto& c : cases) {
    std::vector<double> err;
    for (int n : {16, 32, 64}) err.push_back(sup_error(solve_poisson(ChartGrid(c.d, {n}), c.rhs, c.u), c.u));
    SCOPED_TRACE(c.d.describe());
    EXPECT_GE(std::log2(err[0] / err[1]), 1.9);
    EXPECT_GE(std::log2(err[1] / err[2]), 1.9);
  }
}

TEST(Liouville, ZeroAmplitudeIsConstant) {
  LiouvilleOptions opt;
  opt.boundary_value = 10.0;
  const auto u = solve_liouville(ChartGrid(DomainSpec::cap(1.0, 1.0), {16}), 0.0, 1.0, opt);
  EXPECT_LT((u.values().array() + 10.0).abs().maxCoeff(), 1e-10);
}

TEST(Liouville, IntervalMatchesShootingOracle) {
  const double L = 1.0, B = 15.0;
  const ChartGrid g(DomainSpec::interval(L), {160000});
  SolveInfo info;
  const auto u = solve_liouville(g, 1.0, 1.0, {}, &info);
  EXPECT_LE(info.iterations, 200);
  const LiouvilleShooting oracle(1.0, 1.0, L, B);
  double worst = 0.0;
  for (int k = 0; k < g.size(); k += 200) {
    const double x = g.chart(k)[0];
    if (std::abs(x) <= 0.8 * L) worst = std::max(worst, std::abs(u.values()[k] - oracle(x)));
  }
  EXPECT_LT(worst, 1e-6);
  EXPECT_NEAR(oracle(0.3), liouville_closed_form(0.3, L, B), 1e-9);
}

TEST(Liouville, TrustCollarRecorded) {
  const ChartGrid g(DomainSpec::disk(1.0), {16});
  const auto u = solve_liouville(g, 1.0, 1.0);
  EXPECT_TRUE(u.provenance().growth_condition);
  EXPECT_NEAR(u.provenance().trust_collar, 5 * g.h(), 1e-15);
}

TEST(Semilinear, NewtonFailureIsReported) {
  NewtonOptions opt;
  opt.max_iterations = 1;
  const ChartGrid g(DomainSpec::interval(1.0), {50});
  EXPECT_THROW(solve_semilinear(
                   g, SemilinearSpec::liouville(1.0, 1.0), 0.0, [](const Point&) { return -15.0; }, Vec::Zero(g.size()),
                   {}, opt),
               SolverFailure);
  EXPECT_THROW(solve_semilinear(
                   g, SemilinearSpec::gradient_coupled(), 0.0, [](const Point&) { return 0.0; }, Vec::Zero(g.size())),
               ConfigError);
}

TEST(Heat, ConstantStaysConstant) {
  const ChartGrid g(DomainSpec::cap(1.0, 1.0), {12});
  const auto s = solve_heat(ScalarField::sample(g, [](const Point&) { return 3.0; }), 0.5, 10);
  for (std::size_t i = 0; i < s.size(); ++i)
    EXPECT_LT((dynamic_cast<const ScalarField&>(s.at(i)).values().array() - 3.0).abs().maxCoeff(), 1e-10);
}

TEST(Heat, MatchesSeparatedSolution) {
  const double L = 1.0, T = 0.1;
  const ChartGrid g(DomainSpec::interval(L), {400});
  const double lam = std::pow(std::numbers::pi / (2 * L), 2);
  auto exact = [&](const Point& p, double t) {
    return 2.0 + std::exp(-lam * t) * std::sin(std::numbers::pi * (p.coords[0] + L) / (2 * L));
  };
  const auto s = solve_heat(ScalarField::sample(g, [&](const Point& p) { return exact(p, 0.0); }), T, 20000);
  const auto& last = dynamic_cast<const ScalarField&>(s.at(s.size() - 1));
  EXPECT_LT(sup_error(last, [&](const Point& p) { return exact(p, T); }), 1e-5);
}

TEST(Heat, MaximumPrincipleAndSupNorm) {
  const ChartGrid g(DomainSpec::disk(1.0), {16});
  const auto u0 = ScalarField::sample(g, [](const Point& p) { return 1.0 + std::exp(p.coords[0]) * (1 - p.coords.squaredNorm()); });
  const auto s = solve_heat(u0, 0.5, 50, {true});
  double prev = u0.values().maxCoeff();
  for (std::size_t i = 1; i < s.size(); ++i) {
    const auto& f = dynamic_cast<const ScalarField&>(s.at(i));
    EXPECT_LE(f.values().maxCoeff(), prev + 1e-12);
    EXPECT_GE(f.values().minCoeff(), u0.values().minCoeff() - 1e-12);
    prev = f.values().maxCoeff();
  }
}

TEST(LogTransform, OfHeatSeries) {
  const ChartGrid g(DomainSpec::interval(1.0), {32});
  const auto s = solve_heat(ScalarField::sample(g, [](const Point& p) { return std::exp(p.coords[0] * p.coords[0]); }), 0.1, 5);
  const auto v = log_transform(s, -1);
  ASSERT_EQ(v.size(), s.size());
  const Point p = g.point(10);
  EXPECT_NEAR(v.at(3).value(p), -std::log(s.at(3).value(p)), 1e-14);
}

TEST(Perturbation, ZeroEpsRecoversSolution) {
  const auto d = DomainSpec::disk(1.0);
  const auto u = solve_torsion(ChartGrid(d, {32}));
  const ChartGrid inner(d.shrink(0.2), {24});
  const auto v = perturbed_solve(inner, SemilinearSpec::constant(1.0), 0.0, u);
  double worst = 0.0;
  for (int k = 0; k < inner.size(); ++k) worst = std::max(worst, std::abs(v.values()[k] - u.value(inner.point(k))));
  EXPECT_LT(worst, 1e-10);
}

TEST(Perturbation, RatioBoundedAcrossLadder) {
  for (const auto& d : {DomainSpec::interval(1.0), DomainSpec::disk(1.0)}) {
    const auto u = solve_torsion(ChartGrid(d, {32}));
    const auto r = perturbation_ratios(ChartGrid(d.shrink(0.1), {32}), SemilinearSpec::constant(1.0), {1e-2, 1e-3, 1e-4}, u);
    const double hi = *std::max_element(r.begin(), r.end()), lo = *std::min_element(r.begin(), r.end());
    SCOPED_TRACE(d.describe());
    EXPECT_GT(lo, 0.0);
    EXPECT_LT(hi / lo, 2.0);
  }
}

TEST(Perturbation, RequiresCompactContainment) {
  const auto d = DomainSpec::interval(1.0);
  const auto u = solve_torsion(ChartGrid(d, {16}));
  EXPECT_THROW(perturbed_solve(ChartGrid(d, {16}), SemilinearSpec::constant(1.0), 1e-3, u), DomainViolation);
}

TEST(Evans, IdentityAndConstantSeries) {
  const ChartGrid g(DomainSpec::interval(1.0), {16});
  const auto s = solve_heat(ScalarField::sample(g, [](const Point&) { return 2.0; }), 0.5, 5);
  const auto same = evans_transform(s, 0.0);
  const auto scaled = evans_transform(s, 0.3);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const Point p = g.point(7);
    EXPECT_EQ(same.at(i).value(p), s.at(i).value(p));
    EXPECT_NEAR(scaled.at(i).value(p), std::exp(-0.3 * s.time(i)) * 2.0, 1e-14);
  }
}

TEST(Evans, RescaledResidualComparable) {
  const ChartGrid g(DomainSpec::cap(1.0, 1.0), {16});
  const auto u0 = ScalarField::sample(g, [](const Point& p) { return 1.0 + p.coords[2] * p.coords[2] + 0.3 * p.coords[0]; });
  const auto s = solve_heat(u0, 0.2, 20);
  const auto a = evans_audit(s, 0.5, SemilinearSpec::constant(0.0));
  EXPECT_GT(a.residual_original, 0.0);
  EXPECT_TRUE(a.passed) << a.residual_rescaled << " vs " << a.residual_original;
}

TEST(Richardson, CombinesSecondOrder) { EXPECT_DOUBLE_EQ(richardson(1.0 + 4e-2, 1.0 + 1e-2), 1.0); }
