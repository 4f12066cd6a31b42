#include <gtest/gtest.h>

#include <algorithm>
#include <numbers>

#include "support/fixtures.hpp"
#include "tpc/geodesic.hpp"

using namespace tpc;
using namespace tpc::testing;

namespace {

Point pt(const ManifoldModel& M, std::initializer_list<double> c) {
  Vec v(static_cast<Eigen::Index>(c.size()));
  Eigen::Index i = 0;
  for (double x : c) v[i++] = x;
  return make_point(M, v);
}

const std::vector<double> kTimes{-1.0, -0.6, -0.2, 0.0, 0.3, 0.7, 1.0};

}  // namespace

TEST(Connect, EuclideanIsAffine) {
  const auto M = euclidean2();
  const Point x = pt(M, {0, 1}), y = pt(M, {2, -1});
  const auto seg = connect(M, x, y);
  for (double t : kTimes)
    EXPECT_LT((seg.at(t).coords - ((1 - t) * x.coords + (1 + t) * y.coords) / 2).norm(), 1e-15);
}

TEST(Connect, EquatorSpeedIsHalfDistance) {
  const auto M = sphere2();
  const Point x = pt(M, {1, 0, 0}), y = pt(M, {std::cos(1.0), std::sin(1.0), 0});
  const auto seg = connect(M, x, y);
  EXPECT_NEAR(seg.speed(), 0.5, 1e-15);
}

TEST(Connect, EndpointsSpeedAndMidpoint) {
  std::mt19937_64 rng(21);
  for (const auto& M : {sphere2(), sphere_product(), ManifoldModel({Sphere{2, 1.0}, Euclidean{1}})}) {
    for (int i = 0; i < 30; ++i) {
      const auto [x, y] = random_pair(M, rng, 0.01, safe_distance(M));
      const auto seg = connect(M, x, y);
      EXPECT_LT((seg.at(-1).coords - x.coords).norm(), 1e-10);
      EXPECT_LT((seg.at(1).coords - y.coords).norm(), 1e-10);
      for (double t : kTimes) EXPECT_NEAR(metric_norm(M, seg.velocity(t)), seg.speed(), 1e-12);
      const double d = distance(M, x, y);
      EXPECT_NEAR(distance(M, seg.at(0), x), d / 2, 1e-10);
      EXPECT_NEAR(distance(M, seg.at(0), y), d / 2, 1e-10);
    }
  }
}

TEST(Connect, Errors) {
  const auto M = sphere2();
  const Point x = pt(M, {0, 0, 1});
  EXPECT_THROW(connect(M, x, x), DegenerateSegment);
  EXPECT_THROW(connect(M, x, pt(M, {0, 0, -1})), DomainViolation);
}

TEST(Frame, FlatSpectrumIsZero) {
  const auto M = euclidean2();
  const auto fr = build_frame(connect(M, pt(M, {0, 0}), pt(M, {1, 1})));
  for (double k : fr.kappas()) EXPECT_EQ(k, 0.0);
  EXPECT_LT(fr.orthonormality_defect(0.5), 1e-15);
}

TEST(Frame, UnitSphereSpectrum) {
  const auto M = sphere2();
  const auto fr = build_frame(connect(M, pt(M, {1, 0, 0}), pt(M, {0.2, 1, 0.4})));
  EXPECT_EQ(fr.kappa(0), 0.0);
  EXPECT_NEAR(fr.kappa(1), 1.0, 1e-12);
}

TEST(Frame, ProductSpectrumMatchesBlockDiagonalization) {
  // Equal metric energy in both factors: |v1|^2 = |v2|^2 = |v|^2 / 2.
  const auto M = sphere_product();
  const Point x = pt(M, {0, 0, 1, 0, 0, 1});
  Vec v = Vec::Zero(6);
  v[0] = 0.4;        // factor 1 (kappa = 1): metric length 0.4
  v[3] = 0.4 * 2.0;  // factor 2 (kappa = 4): metric length 0.4
  const Point y = exp_map(M, x, TangentVec{x, v});
  const auto fr = build_frame(connect(M, x, y));
  std::vector<double> expected{0.0, 0.0, 1.0 * 0.5, 4.0 * 0.5};
  std::sort(expected.begin(), expected.end());
  ASSERT_EQ(fr.dim(), 4);
  for (int a = 0; a < 4; ++a) EXPECT_NEAR(fr.kappa(a), expected[a], 1e-12);
}

TEST(Frame, InvariantsOnRandomPairs) {
  std::mt19937_64 rng(22);
  for (const auto& M : {sphere2(), sphere_product(), ManifoldModel({Sphere{3, 2.0}, Euclidean{2}})}) {
    for (int i = 0; i < 20; ++i) {
      const auto [x, y] = random_pair(M, rng, 0.05, safe_distance(M));
      const auto fr = build_frame(connect(M, x, y));
      EXPECT_EQ(fr.kappa(0), 0.0);
      for (int a = 0; a < fr.dim(); ++a) {
        EXPECT_GE(fr.kappa(a), 0.0);
        EXPECT_LE(fr.kappa(a), M.curvature_bound() + 1e-12);
        if (a > 0) EXPECT_LE(fr.kappa(a - 1), fr.kappa(a) + 1e-12);
      }
      EXPECT_LT((fr.E(0, -1).v - (1.0 / fr.speed()) * fr.segment().velocity(-1).v).norm(), 1e-12);
      for (double t : kTimes) {
        EXPECT_LT(fr.orthonormality_defect(t), 1e-12);
        EXPECT_LT(fr.kappa_defect(t), 1e-10);
        EXPECT_LT(fr.c_constancy_defect(t), 1e-10);
      }
    }
  }
}

TEST(Frame, IsParallelUnderFiniteDifferences) {
  // Covariant derivative estimate: transport E(t+s) back to t and difference.
  std::mt19937_64 rng(23);
  const auto M = sphere_product();
  const auto [x, y] = random_pair(M, rng, 0.5, safe_distance(M));
  const auto seg = connect(M, x, y);
  const auto fr = build_frame(seg);
  const double s = 1e-4;
  for (double t : {-0.5, 0.0, 0.5})
    for (int a = 0; a < fr.dim(); ++a) {
      const TangentVec ahead = transport(M, seg.at(t + s), seg.at(t), fr.E(a, t + s));
      const TangentVec behind = transport(M, seg.at(t - s), seg.at(t), fr.E(a, t - s));
      EXPECT_LT(metric_norm(M, (1.0 / (2 * s)) * (ahead - behind)), 1e-8);
    }
}

TEST(Frame, EigenspaceProjectorsAreReproducible) {
  const ManifoldModel M({Sphere{4, 1.0}});
  const Point x = pt(M, {1, 0, 0, 0, 0}), y = pt(M, {0.3, 0.8, 0.2, -0.1, 0.4});
  const auto f1 = build_frame(connect(M, x, y));
  const auto f2 = build_frame(connect(M, x, y));
  // kappa = (0, 1, 1, 1): compare projectors onto the repeated eigenspace.
  Mat P1 = Mat::Zero(5, 5), P2 = Mat::Zero(5, 5);
  for (int a = 1; a < 4; ++a) {
    P1 += f1.E(a, 0.2).v * f1.E(a, 0.2).v.transpose();
    P2 += f2.E(a, 0.2).v * f2.E(a, 0.2).v.transpose();
  }
  EXPECT_EQ(P1, P2);
}

TEST(CurvatureConstants, EuclideanVanish) {
  const auto M = ManifoldModel({Euclidean{3}});
  Vec a(3), b(3);
  a << 0, 0, 0;
  b << 1, 2, 3;
  const auto c = curvature_constants(build_frame(connect(M, make_point(M, a), make_point(M, b))));
  for (double v : c) EXPECT_EQ(v, 0.0);
}

TEST(CurvatureConstants, ConstantCurvaturePattern) {
  // c_{ab g} = -kappa |Gamma'| delta_ab delta_g0 for a, b >= 1 (0-based).
  std::mt19937_64 rng(24);
  const ManifoldModel M({Sphere{3, 2.0}});
  for (int i = 0; i < 10; ++i) {
    const auto [x, y] = random_pair(M, rng, 0.1, safe_distance(M));
    const auto fr = build_frame(connect(M, x, y));
    (void)curvature_constants(fr);
    for (int a = 1; a < fr.dim(); ++a)
      for (int b = 1; b < fr.dim(); ++b)
        for (int g = 0; g < fr.dim(); ++g) {
          const double expect = (a == b && g == 0) ? -2.0 * fr.speed() : 0.0;
          EXPECT_NEAR(fr.c(a, b, g), expect, 1e-12);
        }
  }
}

TEST(CurvatureConstants, ProductHasTransverseSources) {
  std::mt19937_64 rng(25);
  const auto M = sphere_product();
  const auto [x, y] = random_pair(M, rng, 0.5, safe_distance(M));
  const auto fr = build_frame(connect(M, x, y));
  const auto c = curvature_constants(fr);
  double worst = 0.0;
  const int n = fr.dim();
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int g = 1; g < n; ++g) worst = std::max(worst, std::abs(c[(a * n + b) * n + g]));
  EXPECT_GT(worst, 1e-3);
}
