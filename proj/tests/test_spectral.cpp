#include <doctest.h>

#include "gfold/spectral.hpp"
#include "support.hpp"

#include <cmath>

using namespace gfold;
using gfold::test::gauss_legendre;

namespace {

// The defining integral over the unit interval.
double eta_quadrature(int k, int i, int j) {
  return gauss_legendre(
      [&](double x) {
        return (std::cos((i + j - 2) * pi * x) + std::cos((i - j) * pi * x)) * std::cos((k - 1) * pi * x);
      },
      0.0, 1.0);
}

VectorXd samples(const std::function<double(double)>& f, double a, int N) {
  VectorXd s(N + 1);
  for (int m = 0; m <= N; ++m) s(m) = f(-a + 2.0 * a * m / N);
  return s;
}

}  // namespace

TEST_CASE("eigenvalues") {
  CHECK(eigenvalue(1, 0.5) == 0.0);
  CHECK(eigenvalue(2, 0.5) == doctest::Approx(-pi * pi).epsilon(1e-15));
  for (int k = 1; k <= 20; ++k) CHECK(eigenvalue(k, 0.7) == doctest::Approx(b_coefficient(k) / (4 * 0.49)).epsilon(1e-15));
  CHECK_THROWS_AS(eigenvalue(0, 0.5), DomainError);
  CHECK_THROWS_AS(eigenvalue(2, 0.0), DomainError);
  CHECK(b_coefficient(1) == 0.0);
  for (int k = 1; k < 30; ++k) CHECK(b_coefficient(k + 1) <= b_coefficient(k));
}

TEST_CASE("eta closed form against quadrature") {
  CHECK(eta_coefficient(2, 2, 2) == 0.0);
  CHECK(std::abs(eta_quadrature(2, 2, 2)) < 1e-14);
  CHECK(eta_coefficient(3, 2, 2) == 0.5);
  CHECK(eta_quadrature(3, 2, 2) == doctest::Approx(0.5).epsilon(1e-14));
  double worst = 0;
  for (const auto& r : coupling_table(8)) worst = std::max(worst, std::abs(r.eta - eta_quadrature(r.k, r.i, r.j)));
  CHECK(worst < 1e-12);
  CHECK_THROWS_AS(eta_coefficient(1, 2, 2), DomainError);
}

TEST_CASE("selection rule and symmetry, exhaustive to k0 = 12") {
  for (int k = 2; k <= 12; ++k)
    for (int i = 2; i <= 12; ++i)
      for (int j = 2; j <= 12; ++j) {
        const double e = eta_coefficient(k, i, j);
        const bool rule = (i + j - 2 == k - 1) || (std::abs(i - j) == k - 1);
        CHECK((e != 0.0) == rule);
        CHECK((e == 0.0 || e == 0.5 || e == 1.0) == true);
        CHECK(e == eta_coefficient(k, j, i));
      }
}

TEST_CASE("coupling table enumeration") {
  CHECK(coupling_table(4).size() == 27);
  CHECK(coupling_table(1).empty());
  const auto t = coupling_table(3);
  CHECK(t.front().k == 2);
  CHECK(t.back().k == 3);
  CHECK(t.back().j == 3);
}

TEST_CASE("project and reconstruct") {
  const double a = 0.5;
  const Basis b(6, a);
  SUBCASE("constant") {
    const VectorXd c = project(samples([](double) { return 3.0; }, a, 64), b);
    CHECK(c(0) == doctest::Approx(3.0 * std::sqrt(2 * a)).epsilon(1e-12));
    CHECK(c.tail(5).cwiseAbs().maxCoeff() < 1e-10);
  }
  SUBCASE("basis function maps to a unit vector") {
    // 512 panels; with 511 the 3/8 closure leaves 1.4e-10
    const VectorXd c = project(samples([&](double x) { return b.eval(3, x); }, a, 512), b);
    VectorXd e = VectorXd::Zero(6);
    e(2) = 1;
    CHECK((c - e).cwiseAbs().maxCoeff() < 1e-10);
  }
  SUBCASE("x^2 against a Gauss oracle") {
    const VectorXd c = project(samples([](double x) { return x * x; }, a, 2000), b);
    for (int k = 1; k <= 6; ++k) {
      const double o = gauss_legendre([&](double x) { return x * x * b.eval(k, x); }, -a, a);
      CHECK(std::abs(c(k - 1) - o) < 1e-8);
    }
    // coefficients decay like 1/k^2, so the pointwise check needs many modes
    const Basis big(1000, a);
    const VectorXd cb = project(samples([](double x) { return x * x; }, a, 20000), big);
    CHECK(std::abs(reconstruct(cb, 0.25, big) - 0.0625) < 1e-6);
  }
  SUBCASE("round trip on the span") {
    test::Gen g(3);
    for (int trial = 0; trial < 10; ++trial) {
      const VectorXd c0 = g.vec(6, -1, 1);
      const VectorXd c = project(samples([&](double x) { return reconstruct(c0, x, b); }, a, 600), b);
      CHECK((c - c0).cwiseAbs().maxCoeff() < 1e-9);
    }
    VectorXd e24 = VectorXd::Zero(6);
    e24(1) = e24(3) = 1;
    const VectorXd c = project(samples([&](double x) { return b.eval(2, x) + b.eval(4, x); }, a, 256), b);
    CHECK(std::abs(reconstruct(c, 0.1, b) - (b.eval(2, 0.1) + b.eval(4, 0.1))) < 1e-9);
  }
  CHECK(reconstruct(VectorXd::Unit(6, 0), 0.3, b) == doctest::Approx(1.0));
  CHECK_THROWS_AS(reconstruct(VectorXd::Unit(6, 0), 0.6, b), DomainError);
  CHECK_THROWS_AS(project(VectorXd::Ones(10), b), ResolutionError);
}

TEST_CASE("simpson handles odd panel counts") {
  for (int n : {2, 3, 4, 5, 7, 10}) {
    VectorXd f(n + 1);
    for (int m = 0; m <= n; ++m) f(m) = std::pow(double(m) / n, 3);
    CHECK(simpson(f, 1.0 / n) == doctest::Approx(0.25).epsilon(1e-13));
  }
}
