#pragma once

// Isotropic functions f(p, W) of a symmetric matrix W and sampled checks of
// the structural hypotheses the concavity chain relies on.

#include <cmath>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "tpc/errors.hpp"
#include "tpc/geometry.hpp"

namespace tpc {

enum class FKind { neg_trace, trace_exp, weighted_trace };
enum class Cone { all, positive };

/// f(p, W) with W = -Hess u. neg_trace: tr W; trace_exp: tr exp W;
/// weighted_trace: sum_i weights_i * mu_i(W) with mu ascending.
struct IsotropicFSpec {
  FKind kind = FKind::neg_trace;
  std::vector<double> weights;
  Cone cone = Cone::all;

  static IsotropicFSpec neg_trace() { return {FKind::neg_trace, {}, Cone::all}; }
  static IsotropicFSpec trace_exp() { return {FKind::trace_exp, {}, Cone::all}; }
  static IsotropicFSpec weighted_trace(std::vector<double> w, Cone c = Cone::positive) {
    return {FKind::weighted_trace, std::move(w), c};
  }

  std::string name() const {
    switch (kind) {
      case FKind::neg_trace: return "neg_trace";
      case FKind::trace_exp: return "trace_exp";
      case FKind::weighted_trace: return "weighted_trace";
    }
    return "?";
  }
};

inline Vec sorted_eigenvalues(const Mat& W) {
  const Mat S = 0.5 * (W + W.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues();  // ascending
}

inline double evaluate_isotropic_f(const IsotropicFSpec& f, double /*p*/, const Mat& W) {
  const Vec mu = sorted_eigenvalues(W);
  if (f.cone == Cone::positive && mu.size() > 0 && mu[0] < -1e-12)
    throw ConeViolation("evaluate_isotropic_f: eigenvalue outside the closed positive cone");
  switch (f.kind) {
    case FKind::neg_trace: return mu.sum();
    case FKind::trace_exp: return mu.array().exp().sum();
    case FKind::weighted_trace: {
      if (static_cast<Eigen::Index>(f.weights.size()) != mu.size())
        throw ConfigError("weighted_trace: weight count does not match dimension");
      double s = 0.0;
      for (Eigen::Index i = 0; i < mu.size(); ++i) s += f.weights[i] * mu[i];
      return s;
    }
  }
  return 0.0;
}

struct PropertyCheck {
  std::string name;
  bool passed = true;
  std::string witness;  // first counterexample, empty when passed
};

struct PropertyReport {
  bool passed = true;
  std::vector<PropertyCheck> checks;

  const PropertyCheck* find(const std::string& n) const {
    for (const auto& c : checks)
      if (c.name == n) return &c;
    return nullptr;
  }
};

namespace detail {

inline std::string fmt_mat(const Mat& m) {
  std::ostringstream os;
  os.precision(6);
  os << "[";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    os << (i ? "; " : "");
    for (Eigen::Index j = 0; j < m.cols(); ++j) os << (j ? " " : "") << m(i, j);
  }
  os << "]";
  return os.str();
}

inline Mat random_orthogonal(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Mat A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = g(rng);
  Eigen::HouseholderQR<Mat> qr(A);
  return qr.householderQ();
}

// Random symmetric matrix with eigenvalues inside the cone.
inline Mat random_cone_matrix(int n, Cone cone, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(cone == Cone::positive ? 0.0 : -2.0, 2.0);
  Vec d(n);
  for (int i = 0; i < n; ++i) d[i] = u(rng);
  const Mat Q = random_orthogonal(n, rng);
  return Q * d.asDiagonal() * Q.transpose();
}

}  // namespace detail

/// Sampled isotropy, monotonicity in p, eigenvalue-wise monotonicity and
/// midpoint convexity; each check records its first counterexample.
inline PropertyReport check_f_properties(const IsotropicFSpec& f, int dim, int n_samples, std::uint64_t seed = 1) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> up(0.0, 3.0), inc(0.0, 1.0);
  PropertyReport rep;
  PropertyCheck iso{"isotropy"}, mono_p{"monotone_in_gradient"}, mono_eig{"monotone_in_eigenvalues"},
      convex{"convex_in_matrix"};
  const double tol = 1e-10;
  for (int s = 0; s < n_samples; ++s) {
    const Mat A = detail::random_cone_matrix(dim, f.cone, rng);
    const Mat B = detail::random_cone_matrix(dim, f.cone, rng);
    const Mat Q = detail::random_orthogonal(dim, rng);
    const double fa = evaluate_isotropic_f(f, 0.0, A);
    if (iso.passed) {
      const double fq = evaluate_isotropic_f(f, 0.0, Q.transpose() * A * Q);
      if (std::abs(fq - fa) > tol * std::max(1.0, std::abs(fa))) {
        iso.passed = false;
        iso.witness = "W=" + detail::fmt_mat(A) + " f(W)=" + std::to_string(fa) + " f(QtWQ)=" + std::to_string(fq);
      }
    }
    if (mono_p.passed) {
      double p = up(rng), q = p + up(rng);
      if (evaluate_isotropic_f(f, p, A) > evaluate_isotropic_f(f, q, A) + tol) {
        mono_p.passed = false;
        mono_p.witness = "p=" + std::to_string(p) + " q=" + std::to_string(q) + " W=" + detail::fmt_mat(A);
      }
    }
    if (mono_eig.passed) {
      const Vec kap = sorted_eigenvalues(A);
      Vec lam = kap;
      for (int i = 0; i < dim; ++i) lam[i] += inc(rng);
      const double fk = evaluate_isotropic_f(f, 0.0, kap.asDiagonal().toDenseMatrix());
      const double fl = evaluate_isotropic_f(f, 0.0, lam.asDiagonal().toDenseMatrix());
      if (fk > fl + tol) {
        mono_eig.passed = false;
        mono_eig.witness = "kappa=" + detail::fmt_mat(kap.transpose()) + " lambda=" + detail::fmt_mat(lam.transpose());
      }
    }
    if (convex.passed) {
      const double fm = evaluate_isotropic_f(f, 0.0, 0.5 * (A + B));
      const double avg = 0.5 * (fa + evaluate_isotropic_f(f, 0.0, B));
      if (fm > avg + tol * std::max(1.0, std::abs(avg))) {
        convex.passed = false;
        convex.witness = "A=" + detail::fmt_mat(A) + " B=" + detail::fmt_mat(B) + " f(mid)=" + std::to_string(fm) +
                         " avg=" + std::to_string(avg);
      }
    }
  }
  rep.checks = {iso, mono_p, mono_eig, convex};
  for (const auto& c : rep.checks) rep.passed = rep.passed && c.passed;
  return rep;
}

}  // namespace tpc
