#include <gtest/gtest.h>

#include <sstream>

#include "support/fixtures.hpp"
#include "tpc/variation.hpp"

using namespace tpc;
using namespace tpc::testing;

namespace {

double max_abs(const KFieldSet& f) {
  double w = 0.0;
  for (KKind k : kAllKinds)
    for (int a = 0; a < f.dim(); ++a)
      for (int b = 0; b < f.dim(); ++b) w = std::max(w, f.at(k, a, b).cwiseAbs().maxCoeff());
  return w;
}

std::pair<Point, Point> fixed_pair(const ManifoldModel& M, unsigned seed) {
  std::mt19937_64 rng(seed);
  return random_pair(M, rng, 0.5, safe_distance(M));
}

}  // namespace

TEST(KFields, FlatVanishBothMethods) {
  const ManifoldModel M({Euclidean{2}});
  Vec a(2), b(2);
  a << 0, 0;
  b << 1, -2;
  const Point x = make_point(M, a), y = make_point(M, b);
  EXPECT_EQ(max_abs(k_fields_ode(build_frame(connect(M, x, y)))), 0.0);
  EXPECT_LT(max_abs(k_fields_fd(M, x, y, 1e-3)), 1e-9);
}

TEST(KFields, BoundaryValuesVanish) {
  const auto M = sphere2();
  const auto [x, y] = fixed_pair(M, 41);
  const auto fd = k_fields_fd(M, x, y, 1e-3);
  for (KKind k : kAllKinds)
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        const Mat& m = fd.at(k, a, b);
        EXPECT_LT(m.col(0).cwiseAbs().maxCoeff(), 1e-6);
        EXPECT_LT(m.col(m.cols() - 1).cwiseAbs().maxCoeff(), 1e-6);
      }
}

TEST(KFields, SymmetriesOfKinds) {
  const auto M = sphere_product();
  const auto [x, y] = fixed_pair(M, 42);
  const auto fr = build_frame(connect(M, x, y));
  const auto ode = k_fields_ode(fr);
  for (int a = 0; a < fr.dim(); ++a)
    for (int b = 0; b < fr.dim(); ++b) {
      EXPECT_LT((ode.at(KKind::xx, a, b) - ode.at(KKind::xx, b, a)).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_LT((ode.at(KKind::yy, a, b) - ode.at(KKind::yy, b, a)).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_LT((ode.at(KKind::xy, a, b) - ode.at(KKind::yx, b, a)).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(KFields, FiniteDifferencesAgreeWithOdeAndConverge) {
  for (const auto& M : {sphere2(), sphere_product()}) {
    const auto [x, y] = fixed_pair(M, 43);
    const auto ode = k_fields_ode(build_frame(connect(M, x, y)));
    std::vector<double> dev;
    for (double h : {4e-3, 2e-3, 1e-3}) {
      const auto fd = k_fields_fd(M, x, y, h);
      double w = 0.0;
      for (KKind k : kAllKinds)
        for (int a = 0; a < fd.dim(); ++a)
          for (int b = 0; b < fd.dim(); ++b)
            for (std::size_t i = 0; i < fd.t().size(); ++i)
              w = std::max(w, (fd.at(k, a, b).col(i) - ode.at(k, a, b).col(10 * i)).cwiseAbs().maxCoeff());
      dev.push_back(w);
    }
    EXPECT_LT(dev.back(), 5e-6);
    EXPECT_GE(std::log2(dev[0] / dev[1]), 1.9);
    EXPECT_GE(std::log2(dev[1] / dev[2]), 1.9);
  }
}

TEST(KCombos, SymmetricInIndices) {
  const auto M = sphere_product();
  const auto [x, y] = fixed_pair(M, 44);
  const auto ode = k_fields_ode(build_frame(connect(M, x, y)));
  for (int s : {1, -1})
    for (int a = 0; a < ode.dim(); ++a)
      for (int b = 0; b < ode.dim(); ++b)
        EXPECT_LT((k_combo(ode, s, a, b).comps - k_combo(ode, s, b, a).comps).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(KCombos, MidpointVanishingAndOddness) {
  std::mt19937_64 rng(45);
  for (const auto& M : {sphere2(), sphere_product()}) {
    for (int i = 0; i < 3; ++i) {
      const auto [x, y] = random_pair(M, rng, 0.2, safe_distance(M));
      const auto fr = build_frame(connect(M, x, y));
      const auto ode = k_fields_ode(fr);
      for (int s : {1, -1})
        for (const auto& k : k_combos(ode, s)) {
          EXPECT_LT(k.comps.col(midpoint_index(k.t)).cwiseAbs().maxCoeff(), 1e-8);
          EXPECT_LT(combo_oddness(k), 1e-8);
        }
    }
  }
}

TEST(KCombos, GridMismatchThrows) {
  KFieldSet f(2, detail::uniform_times(10));
  f.at(KKind::xy, 0, 1) = Mat::Zero(2, 5);
  EXPECT_THROW(k_combo(f, 1, 0, 1), GridMismatch);
}

TEST(Identity, ResidualSmallWithNonzeroTransverseSource) {
  for (const auto& M : {sphere2(), sphere_product()}) {
    const auto [x, y] = fixed_pair(M, 46);
    const auto fr = build_frame(connect(M, x, y));
    const auto ode = k_fields_ode(fr);
    double worst = 0.0, transverse_rhs = 0.0;
    for (int s : {1, -1})
      for (int a = 0; a < fr.dim(); ++a)
        for (int b = 0; b < fr.dim(); ++b)
          for (int g = 0; g < fr.dim(); ++g) {
            worst = std::max(worst, fundamental_identity_residual(fr, a, b, g, s, ode));
            if (g >= 1) transverse_rhs = std::max(transverse_rhs, std::abs(fundamental_rhs(fr, s, a, b, g, 0.5)));
          }
    EXPECT_LT(worst, 1e-6);
    if (M.num_factors() == 2) EXPECT_GT(transverse_rhs, 1e-3);
  }
}

TEST(Eta, OddOnAllSpaces) {
  for (const auto& M : {ManifoldModel({Euclidean{2}}), sphere2(), sphere_product()}) {
    const auto [x, y] = fixed_pair(M, 47);
    const auto fr = build_frame(connect(M, x, y));
    for (int s : {1, -1})
      for (int a = 0; a < fr.dim(); ++a)
        for (int b = 0; b < fr.dim(); ++b)
          for (int g = 0; g < fr.dim(); ++g) EXPECT_LT(eta_oddness(fr, a, b, g, s), 1e-12);
  }
}

TEST(Export, CsvHasHeaderAndRows) {
  const auto M = sphere2();
  const auto [x, y] = fixed_pair(M, 48);
  const auto ode = k_fields_ode(build_frame(connect(M, x, y)), 20);
  std::ostringstream os;
  write_kfields_csv(os, ode);
  const std::string s = os.str();
  EXPECT_EQ(s.substr(0, s.find('\n')), "t,kind,alpha,beta,c0,c1");
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 1 + 4 * 2 * 2 * 21);
}
