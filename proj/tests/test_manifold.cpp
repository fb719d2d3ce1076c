#include <doctest.h>

#include "gfold/manifold.hpp"
#include "gfold/vectorfields.hpp"
#include "support.hpp"

using namespace gfold;

namespace {

// Oracle: dense scan of the largest real part of the finite-difference layer Jacobian, then bisection.
double scan_boundary(VectorXd u, const Basis& b, double lo, double hi, int n = 1500) {
  ModelParams p(b.k0(), b.a(), 0.0);
  const int k0 = b.k0();
  auto lam = [&](double s) {
    u(0) = s;
    const VectorXd v = critical_graph(u, b);
    auto fast = [&](const VectorXd& x) {
      VectorXd y(2 * k0);
      y << x, v;
      return VectorXd(rhs_rescaled(y, p).head(k0));
    };
    const MatrixXd J = test::fd_jacobian(fast, u, 1e-5);
    return Eigen::EigenSolver<MatrixXd>(J, false).eigenvalues().real().maxCoeff();
  };
  double a = lo, fa = lam(lo);
  for (int i = 1; i <= n; ++i) {
    const double b2 = lo + (hi - lo) * i / n, fb = lam(b2);
    if ((fa < 0) != (fb < 0)) {
      double x0 = a, x1 = b2;
      for (int it = 0; it < 60; ++it) {
        const double m = 0.5 * (x0 + x1);
        ((lam(m) < 0) == (fa < 0) ? x0 : x1) = m;
      }
      return 0.5 * (x0 + x1);
    }
    a = b2;
    fa = fb;
  }
  return NAN;
}

VectorXd vec(std::initializer_list<double> l) {
  VectorXd v(static_cast<Index>(l.size()));
  Index i = 0;
  for (double x : l) v(i++) = x;
  return v;
}

constexpr double boundary_k2_u2_05 = -0.0356404354981388;
constexpr double boundary_k3_u2_03_u3_02 = -0.0147031829933934;

}  // namespace

TEST_CASE("critical graph") {
  const Basis b2(2, 0.5);
  CHECK(critical_graph(VectorXd::Zero(2), b2).isZero());
  test::Gen g(31);
  for (int n = 0; n < 20; ++n) {
    const double u1 = g.uniform(-1, 1), u2 = g.uniform(-1, 1);
    const VectorXd v = critical_graph(vec({u1, u2}), b2);
    CHECK(v(0) == doctest::Approx((u1 * u1 + u2 * u2) / sqrt2));
    CHECK(v(1) == doctest::Approx(-pi * pi * u2 + sqrt2 * u1 * u2));
  }
  // the fast field vanishes on the graph
  double worst = 0;
  for (int n = 0; n < 100; ++n) {
    const int k0 = g.integer(1, 8);
    const Basis b(k0, g.uniform(0.3, 1.5));
    const VectorXd u = g.vec(k0, -1, 1);
    VectorXd y(2 * k0);
    y << u, critical_graph(u, b);
    worst = std::max(worst, rhs_rescaled(y, ModelParams(k0, b.a(), 0.0)).head(k0).cwiseAbs().maxCoeff());
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("layer jacobian") {
  const Basis b3(3, 0.5);
  const MatrixXd J = layer_jacobian(vec({-1, 0, 0}), b3);
  MatrixXd D = MatrixXd::Zero(3, 3);
  D.diagonal() << -sqrt2, -sqrt2 - pi * pi, -sqrt2 - 4 * pi * pi;
  CHECK((J - D).cwiseAbs().maxCoeff() < 1e-12);
  test::Gen g(32);
  for (int n = 0; n < 30; ++n) {
    const int k0 = g.integer(1, 6);
    const Basis b(k0, g.uniform(0.3, 1.5));
    ModelParams p(k0, b.a(), 0.0);
    const VectorXd u = g.vec(k0, -1, 1);
    const VectorXd v = critical_graph(u, b);
    auto fast = [&](const VectorXd& x) {
      VectorXd y(2 * k0);
      y << x, v;
      return VectorXd(rhs_rescaled(y, p).head(k0));
    };
    CHECK((layer_jacobian(u, b) - test::fd_jacobian(fast, u)).cwiseAbs().maxCoeff() < 1e-6);
  }
  const Basis b2(2, 0.5);
  const MatrixXd K = layer_jacobian(vec({0, 1}), b2);
  CHECK(K(0, 1) == doctest::Approx(sqrt2));
  CHECK(K(1, 1) == doctest::Approx(-pi * pi));
}

TEST_CASE("classification") {
  const Basis b2(2, 0.5);
  CHECK(classify(vec({-0.5, 0.0}), b2).kind == StabilityKind::attracting);
  const auto s = classify(vec({3.0, 0.0}), b2);
  CHECK(s.kind == StabilityKind::saddle);
  CHECK(s.unstable == 1);
  CHECK(s.label() == "saddle(1)");
  CHECK(classify(vec({0.0, 0.0}), b2).kind == StabilityKind::nonhyperbolic);
  // on the planar branch every eigenvalue sits at or below 2^{1/2} u1
  test::Gen g(33);
  for (int n = 0; n < 30; ++n) {
    const int k0 = g.integer(2, 8);
    const Basis b(k0, 0.5);
    VectorXd u = VectorXd::Zero(k0);
    u(0) = g.uniform(-2, -0.1);
    const auto c = classify(u, b);
    CHECK(c.kind == StabilityKind::attracting);
    CHECK(c.max_real <= sqrt2 * u(0) + 1e-12);
  }
  // tol halving away from the boundary leaves the class unchanged
  for (int n = 0; n < 50; ++n) {
    const VectorXd u = g.vec(3, -1, 1);
    const Basis b(3, 0.5);
    const auto c = classify(u, b, 1e-6);
    if (std::abs(c.max_real) > 1e-5) CHECK(classify(u, b, 5e-7).kind == c.kind);
  }
}

TEST_CASE("fold boundary") {
  const Basis b2(2, 0.5), b3(3, 0.5);
  CHECK(std::abs(fold_boundary_u1(vec({0, 0}), b2)) < 1e-10);
  const double o2 = scan_boundary(vec({0, 0.5}), b2, -1, 0.5);
  CHECK(std::abs(o2 - boundary_k2_u2_05) < 1e-9);
  CHECK(std::abs(fold_boundary_u1(vec({0, 0.5}), b2) - boundary_k2_u2_05) < 1e-10);
  // closed-form root of the 2x2 determinant
  CHECK(std::abs((sqrt2 * pi * pi - std::sqrt(2 * std::pow(pi, 4) + 4.0)) / 4 - boundary_k2_u2_05) < 1e-12);
  const double o3 = scan_boundary(vec({0, 0.3, 0.2}), b3, -1, 0.5);
  CHECK(std::abs(o3 - boundary_k3_u2_03_u3_02) < 1e-9);
  CHECK(std::abs(fold_boundary_u1(vec({0, 0.3, 0.2}), b3) - boundary_k3_u2_03_u3_02) < 1e-10);
  CHECK(std::abs(max_real_eigenvalue(vec({boundary_k2_u2_05, 0.5}), b2)) < 1e-10);
  CHECK_THROWS_AS(fold_boundary(vec({0, 0.5}), 1, b2, -1.0, -0.5), BracketError);
  // nominal closed form is a different curve
  CHECK(std::abs(g_nominal(0.5) - boundary_k2_u2_05) > 1e-2);
}

TEST_CASE("slow image of the fold curve") {
  const Basis b2(2, 0.5);
  const SlowImageCurve c = slow_image_of_boundary(b2, 0.1, 41);
  CHECK(c.fit_residual < 1e-6);
  const VectorXd v = critical_graph(vec({c.u1[20], c.u2[20]}), b2);
  CHECK(c.v1[20] == v(0));
  CHECK(c.v2[20] == v(1));
  for (double v2 : {0.01, 0.05, 0.2}) CHECK(fold_image_height(v2, b2) == doctest::Approx(fold_image_height(-v2, b2)));
  for (std::size_t i = 0; i < c.v1.size(); ++i) CHECK(c.v1[i] == doctest::Approx(c.v1[c.v1.size() - 1 - i]));
  CHECK_THROWS_AS(slow_image_of_boundary(Basis(3, 0.5)), DomainError);
}

TEST_CASE("entry predicate") {
  const Basis b2(2, 0.5);
  EntryRegionSpec s;
  const double r2 = s.rho * s.rho;
  CHECK(entry_s(r2, s) == s.C_in_v2);
  CHECK(entry_predicate(r2, s.C_in_v2, s, b2));
  CHECK(entry_predicate(r2 + 0.01, 0.0, s, b2));
  CHECK_FALSE(entry_predicate(r2 + 0.01, 2 * entry_s(r2 + 0.01, s), s, b2));
  CHECK_FALSE(entry_predicate(-0.01, 0.0, s, b2));
}

TEST_CASE("galerkin convergence") {
  const ConvergenceReport r = galerkin_convergence_check({2, 4, 8}, 16);
  REQUIRE(r.distance.size() == 3);
  CHECK(r.monotone);
  CHECK(r.distance[0] > r.distance[1]);
  CHECK(r.distance[1] > r.distance[2]);
  CHECK(r.exponent_fit >= 0.5);
  CHECK_THROWS_AS(galerkin_convergence_check({2, 8}, 12), DomainError);
}
