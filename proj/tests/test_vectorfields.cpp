#include <doctest.h>

#include "gfold/vectorfields.hpp"
#include "support.hpp"

#include <unsupported/Eigen/AutoDiff>

using namespace gfold;

namespace {

// Fast field as the projection of the pointwise square onto each mode.
VectorXd pseudospectral(const VectorXd& y, const ModelParams& p) {
  const int k0 = p.k0();
  const double a = p.a();
  const Basis& b = p.basis;
  const VectorXd u = y.head(k0), v = y.tail(k0);
  auto field = [&](double x) {
    double s = 0;
    for (int j = 1; j <= k0; ++j) s += u(j - 1) * b.eval(j, x);
    return s;
  };
  VectorXd d(2 * k0);
  for (int k = 1; k <= k0; ++k) {
    const double nk = test::gauss_legendre([&](double x) { return field(x) * field(x) * b.eval(k, x); }, -a, a, 32);
    d(k - 1) = b.lambda(k) * u(k - 1) - v(k - 1) + nk;
    d(k0 + k - 1) = p.eps * b.lambda(k) * v(k - 1);
  }
  d(k0) -= std::sqrt(2 * a) * p.eps;
  return d;
}

}  // namespace

TEST_CASE("hand-evaluated examples") {
  ModelParams p(2, 0.5, 0.0);
  VectorXd y(4);
  y << 1, 1, 0, 0;
  const VectorXd o = rhs_original(y, p);
  CHECK(o(0) == doctest::Approx(2.0));
  CHECK(o(1) == doctest::Approx(2.0 - pi * pi));
  const VectorXd r = rhs_rescaled(y, p);
  CHECK(r(0) == doctest::Approx(sqrt2));
  CHECK(r(1) == doctest::Approx(sqrt2 - pi * pi));
  CHECK(r(2) == 0.0);
  CHECK(r(3) == 0.0);

  ModelParams q(3, 0.8, 0.01);
  VectorXd z = rhs_original(VectorXd::Zero(6), q);
  CHECK(z(3) == doctest::Approx(-std::sqrt(1.6) * 0.01));
  z(3) = 0;
  CHECK(z.cwiseAbs().maxCoeff() == 0.0);

  VectorXd e(4);
  e << 1, 0, 1, 0;
  const VectorXd x = rhs_example2(e, 0.0);
  CHECK(x(0) == 2.0);
  CHECK(x(2) == doctest::Approx(2.0 - pi * pi));
  CHECK(rhs_example2(VectorXd::Zero(4), 0.3)(1) == -0.3);
  CHECK(rhs_fold_normal(0, 1) == 1.0);
  CHECK(rhs_fold_normal(2, -4) == 0.0);
  CHECK_THROWS_AS(rhs_original(VectorXd::Zero(5), q), ShapeError);
}

TEST_CASE("pseudospectral equivalence on random states") {
  test::Gen g(11);
  double worst = 0;
  for (int n = 0; n < 100; ++n) {
    const int k0 = g.integer(1, 6);
    ModelParams p(k0, g.uniform(0.3, 2.0), g.uniform(0.0, 0.1));
    const VectorXd y = g.vec(2 * k0, -1, 1);
    worst = std::max(worst, (rhs_original(y, p) - pseudospectral(y, p)).cwiseAbs().maxCoeff());
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("rescaling conjugacy") {
  test::Gen g(12);
  double worst = 0;
  for (int n = 0; n < 100; ++n) {
    const int k0 = g.integer(1, 6);
    const double a = g.uniform(0.3, 2.0);
    ModelParams p(k0, a, g.uniform(0.0, 0.1));
    const VectorXd yh = g.vec(2 * k0, -1, 1);
    const VectorXd lhs = rhs_rescaled(yh, p);
    const VectorXd rhs = rhs_original(VectorXd(std::sqrt(a) * yh), p) / std::sqrt(a);
    worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
  }
  CHECK(worst < 1e-13);
}

TEST_CASE("planar reduction and invariant plane") {
  test::Gen g(13);
  for (int n = 0; n < 50; ++n) {
    const int k0 = g.integer(2, 6);
    ModelParams p(k0, g.uniform(0.3, 2.0), g.uniform(0.0, 0.1));
    VectorXd y = VectorXd::Zero(2 * k0);
    y(0) = g.uniform(-2, 2);
    y(k0) = g.uniform(-2, 2);
    const VectorXd d = rhs_rescaled(y, p);
    CHECK(d(0) == doctest::Approx(-y(k0) + y(0) * y(0) / sqrt2).epsilon(1e-15));
    CHECK(d(k0) == -sqrt2 * p.eps);
    for (int k = 2; k <= k0; ++k) {
      CHECK(d(k - 1) == 0.0);
      CHECK(d(k0 + k - 1) == 0.0);
    }
  }
  ModelParams p(2, 0.5, 0.0);
  const double c = 0.7;
  VectorXd y(4);
  y << -std::pow(2.0, 0.25) * c, 0, c * c, 0;
  CHECK(std::abs(rhs_rescaled(y, p)(0)) < 1e-15);
}

TEST_CASE("slow-time form") {
  test::Gen g(14);
  for (int n = 0; n < 20; ++n) {
    ModelParams p(3, 0.5, g.uniform(1e-4, 1e-1));
    const VectorXd y = g.vec(6, -1, 1);
    const VectorXd f = rhs_rescaled(y, p), s = rhs_slowtime(y, p);
    for (int i = 0; i < 3; ++i) CHECK(s(i) == doctest::Approx(f(i) / p.eps).epsilon(1e-14));
    for (int i = 3; i < 6; ++i) CHECK(s(i) == f(i));
  }
  CHECK_THROWS_AS(rhs_slowtime(VectorXd::Zero(6), ModelParams(3, 0.5, 0.0)), DomainError);
}

TEST_CASE("prepared system") {
  test::Gen g(15);
  for (int n = 0; n < 50; ++n) {
    const int k0 = g.integer(1, 5);
    const double eps = g.uniform(1e-6, 1e-2), A = g.uniform(0.2, 2.0);
    const double a = A * std::pow(eps, -1.0 / 6.0);
    ModelParams pr(k0, 1.0, eps);
    pr.A = A;
    ModelParams rs(k0, a, eps);
    VectorXd y = g.vec(2 * k0 + 1, -1, 1);
    y(2 * k0) = eps;
    const VectorXd d = rhs_prepared(y, pr);
    CHECK(d(2 * k0) == 0.0);
    const VectorXd r = rhs_rescaled(VectorXd(y.head(2 * k0)), rs);
    CHECK((d.head(2 * k0) - r).cwiseAbs().maxCoeff() < 1e-12);
  }
  ModelParams p(2, 1.0, 1e-3);
  p.A = 1.0;
  VectorXd y = VectorXd::Zero(5);
  y(1) = 1.0;
  y(4) = 1e-3;
  CHECK(rhs_prepared(y, p)(1) == doctest::Approx(-pi * pi * 0.1 / 4));
  y(4) = -1e-3;
  CHECK_THROWS_AS(rhs_prepared(y, p), DomainError);
}

TEST_CASE("fields differentiate through AutoDiff") {
  using AD = Eigen::AutoDiffScalar<Eigen::Matrix<double, 6, 1>>;
  ModelParams p(3, 0.5, 1e-2);
  test::Gen g(16);
  const VectorXd y = g.vec(6, -1, 1);
  Vec<AD> ya(6);
  for (int i = 0; i < 6; ++i) ya(i) = AD(y(i), 6, i);  // fixed-size derivatives: Scalar(0) must be valid
  const Vec<AD> d = rhs_rescaled(ya, p);
  MatrixXd J(6, 6);
  for (int i = 0; i < 6; ++i) J.row(i) = d(i).derivatives().transpose();
  const MatrixXd Jf = test::fd_jacobian([&](const VectorXd& x) { return VectorXd(rhs_rescaled(x, p)); }, y);
  CHECK((J - Jf).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("fold normal form exact solution") {
  for (double mu : {0.25, 1.0, 4.0})
    for (double xi : {-1.0, 0.0, 0.5}) {
      const double s = std::sqrt(mu);
      for (double t = 0; t < 0.3; t += 0.05) {
        const double x = s * std::tan(std::atan(xi / s) + s * t);
        const double dx = mu / std::pow(std::cos(std::atan(xi / s) + s * t), 2);
        CHECK(std::abs(dx - rhs_fold_normal(x, mu)) < 1e-10);
      }
    }
}

TEST_CASE("higher-order terms") {
  const int k0 = 2;
  auto pw = [](std::initializer_list<int> l) { return std::vector<int>(l); };
  // layout u1 u2 v1 v2 eps
  CHECK(HigherOrderSpec::admissible(k0, "u1", pw({0, 0, 0, 0, 1})));
  CHECK(HigherOrderSpec::admissible(k0, "u1", pw({0, 0, 2, 0, 0})));
  CHECK(HigherOrderSpec::admissible(k0, "u1", pw({1, 0, 1, 0, 0})));
  CHECK_FALSE(HigherOrderSpec::admissible(k0, "u1", pw({2, 0, 0, 0, 0})));
  CHECK_FALSE(HigherOrderSpec::admissible(k0, "u1", pw({0, 0, 1, 0, 0})));
  CHECK(HigherOrderSpec::admissible(k0, "u2", pw({0, 0, 1, 1, 0})));
  CHECK_FALSE(HigherOrderSpec::admissible(k0, "u2", pw({1, 1, 0, 0, 0})));
  CHECK(HigherOrderSpec::admissible(k0, "v2", pw({0, 0, 0, 2, 0})));
  CHECK_THROWS_AS(HigherOrderSpec::admissible(k0, "v1", pw({0, 0, 0, 2, 0})), ConfigError);
  CHECK_THROWS_AS(HigherOrderSpec::polynomial(k0, {{"u1", 1.0, pw({2, 0, 0, 0, 0})}}), ConfigError);

  ModelParams p(k0, 0.5, 0.01);
  p.hot = HigherOrderSpec::polynomial(k0, {{"u1", 2.0, pw({0, 0, 2, 0, 0})}, {"v2", 3.0, pw({0, 0, 0, 2, 0})}});
  VectorXd y(4);
  y << 0.1, 0.2, 0.3, 0.4;
  const VectorXd base = rhs_rescaled(y, ModelParams(k0, 0.5, 0.01));
  const VectorXd d = rhs_rescaled(y, p);
  CHECK(d(0) - base(0) == doctest::Approx(2.0 * 0.09));
  CHECK(d(3) - base(3) == doctest::Approx(0.01 * 3.0 * 0.16));
  CHECK(d(1) == base(1));
}

TEST_CASE("state layout") {
  GalerkinState s = GalerkinState::zero(3);
  s.u(1) = 2;
  s.v(2) = 5;
  const VectorXd y = s.flat();
  CHECK(y(1) == 2);
  CHECK(y(5) == 5);
  const auto b = GalerkinState::from_flat(y);
  CHECK(b.u == s.u);
  CHECK(b.v == s.v);
  CHECK_THROWS_AS(GalerkinState::from_flat(VectorXd::Zero(3)), ShapeError);
}
