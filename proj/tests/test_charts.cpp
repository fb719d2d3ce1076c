#include <doctest.h>

#include "gfold/charts.hpp"
#include "gfold/riccati.hpp"
#include "gfold/vectorfields.hpp"
#include "support.hpp"

using namespace gfold;

namespace {

VectorXd flat(const Downstairs& d) {
  VectorXd Y(2 * d.u.size() + 1);
  Y << d.u, d.v, d.eps;
  return Y;
}

// Random chart point inside each chart's domain.
ChartState random_state(test::Gen& g, Chart c, int k0) {
  VectorXd y = g.vec(2 * k0 + 1, -0.5, 0.5);
  switch (c) {
    case Chart::K1:
      y(1) = g.uniform(0.1, 1.0);
      y(2 * k0) = g.uniform(0.01, 0.5);
      break;
    case Chart::K2:
      y(1) = g.uniform(0.2, 2.0);
      y(0) = g.uniform(0.2, 2.0);
      y(2 * k0) = g.uniform(0.1, 1.0);
      break;
    case Chart::K3:
      y(0) = g.uniform(0.1, 1.0);
      y(2 * k0) = g.uniform(0.01, 0.5);
      break;
  }
  return {c, y};
}

VectorXd chart_rhs(Chart c, const VectorXd& y, const ChartParams& p) {
  switch (c) {
    case Chart::K1:
      return rhs_K1(y, p);
    case Chart::K2:
      return rhs_K2(y, p);
    default:
      return rhs_K3(y, p);
  }
}

double chart_radius(const ChartState& s) {
  const int k0 = s.k0();
  return s.chart == Chart::K1 ? s.coords(1) : s.chart == Chart::K2 ? s.coords(2 * k0) : s.coords(0);
}

}  // namespace

TEST_CASE("chart names and layout") {
  const auto n = chart_names(Chart::K1, 3);
  REQUIRE(n.size() == 7);
  CHECK(n.front() == "u1_1");
  CHECK(n[2] == "u2_1");
  CHECK(n[5] == "v3_1");
  CHECK(n.back() == "eps1");
  CHECK(chart_names(Chart::K2, 1).back() == "r2");
  CHECK(chart_names(Chart::K3, 2)[0] == "r3");
  CHECK(chart_from_string("K2") == Chart::K2);
  CHECK_THROWS_AS(chart_from_string("k4"), ConfigError);
}

TEST_CASE("lift and blowdown are inverse") {
  test::Gen g(41);
  for (int n = 0; n < 200; ++n) {
    const int k0 = g.integer(1, 5);
    const Chart c = static_cast<Chart>(g.integer(0, 2));
    VectorXd u = g.vec(k0, -1, 1), v = g.vec(k0, -1, 1);
    const double eps = g.uniform(1e-6, 1e-2);
    if (c == Chart::K1) v(0) = g.uniform(0.01, 1);
    if (c == Chart::K3) u(0) = g.uniform(0.01, 1);
    const Downstairs d = blowdown(lift_to_chart(u, v, eps, c));
    CHECK((d.u - u).cwiseAbs().maxCoeff() < 1e-13);
    CHECK((d.v - v).cwiseAbs().maxCoeff() < 1e-13);
    CHECK(d.eps == doctest::Approx(eps).epsilon(1e-13));
  }
  const VectorXd z = VectorXd::Zero(2);
  CHECK_THROWS_AS(lift_to_chart(z, z, 1e-3, Chart::K1), ChartDomainError);
  CHECK_THROWS_AS(lift_to_chart(z, z, 1e-3, Chart::K3), ChartDomainError);
  CHECK_THROWS_AS(lift_to_chart(z, z, 0.0, Chart::K2), ChartDomainError);
  CHECK_THROWS_AS(blowdown(ChartState{Chart::K1, VectorXd::Zero(4)}), ShapeError);
}

TEST_CASE("chart changes") {
  test::Gen g(42);
  for (int n = 0; n < 100; ++n) {
    const int k0 = g.integer(1, 5);
    const ChartState s1 = random_state(g, Chart::K1, k0);
    const ChartState s2 = kappa12(s1);
    CHECK(s2.chart == Chart::K2);
    CHECK((kappa21(s2).coords - s1.coords).cwiseAbs().maxCoeff() < 1e-11 * (1 + s1.coords.cwiseAbs().maxCoeff()));
    CHECK((flat(blowdown(s2)) - flat(blowdown(s1))).cwiseAbs().maxCoeff() < 1e-13);

    const ChartState t2 = random_state(g, Chart::K2, k0);
    const ChartState t3 = kappa23(t2);
    CHECK((kappa32(t3).coords - t2.coords).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((flat(blowdown(t3)) - flat(blowdown(t2))).cwiseAbs().maxCoeff() < 1e-13);
  }
  ChartState bad = random_state(g, Chart::K2, 2);
  bad.coords(0) = -1;
  CHECK_THROWS_AS(kappa23(bad), ChartDomainError);
  bad.coords(1) = -1;
  CHECK_THROWS_AS(kappa21(bad), ChartDomainError);
  CHECK_THROWS_AS(kappa12(bad), ChartDomainError);
}

TEST_CASE("chart fields are the blown-up prepared field") {
  // d(blowdown) . X_chart = X_prepared / r
  test::Gen g(43);
  for (int n = 0; n < 90; ++n) {
    const int k0 = g.integer(1, 4);
    const Chart c = static_cast<Chart>(n % 3);
    const ChartParams cp(k0, g.uniform(0.3, 2.0));
    ModelParams mp(k0, 1.0, 0.0);
    mp.A = cp.A;
    const ChartState s = random_state(g, c, k0);
    auto B = [&](const VectorXd& y) { return flat(blowdown(ChartState{c, y})); };
    const VectorXd lhs = test::fd_jacobian(B, s.coords, 1e-6) * chart_rhs(c, s.coords, cp);
    const VectorXd rhs = VectorXd(rhs_prepared(B(s.coords), mp)) / chart_radius(s);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-7 * (1 + rhs.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("smooth forms") {
  test::Gen g(44);
  for (int n = 0; n < 60; ++n) {
    const int k0 = g.integer(1, 5);
    const ChartParams p(k0, 0.5);
    for (Chart c : {Chart::K1, Chart::K3}) {
      const ChartState s = random_state(g, c, k0);
      const VectorXd ys = to_smooth(s);
      CHECK((from_smooth(c, ys).coords - s.coords).cwiseAbs().maxCoeff() < 1e-15);
      const VectorXd d = chart_rhs(c, s.coords, p);
      const VectorXd ds = c == Chart::K1 ? VectorXd(rhs_K1_smooth(ys, p)) : VectorXd(rhs_K3_smooth(ys, p));
      const Index e = 2 * k0;
      CHECK((ds.head(e) - d.head(e)).cwiseAbs().maxCoeff() < 1e-12);
      CHECK(ds(e) == doctest::Approx(d(e) / (3 * ys(e) * ys(e))));
    }
    // smooth chart change agrees with the plain one
    const ChartState s1 = random_state(g, Chart::K1, k0);
    CHECK((VectorXd(kappa12_smooth(to_smooth(s1), k0)) - kappa12(s1).coords).cwiseAbs().maxCoeff() < 1e-12);
  }
  const ChartParams p(2, 0.5);
  VectorXd y = VectorXd::Zero(5);
  y(1) = 1.0 / sqrt2;
  CHECK_THROWS_AS(rhs_K3_time_rescaled(y, p), SingularRescaleError);
  CHECK_THROWS_AS(to_smooth(ChartState{Chart::K1, -VectorXd::Ones(5)}), ChartDomainError);
}

TEST_CASE("K2 spectrum of the higher modes") {
  // with u12 = 0 and r2 = 0 the (u_k, v_k) block is upper triangular with c(k) and 0
  const int k0 = 4;
  const ChartParams p(k0, 0.7);
  VectorXd y = VectorXd::Zero(2 * k0 + 1);
  y(1) = 0.3;
  auto f = [&](const VectorXd& x) { return VectorXd(rhs_K2(x, p)); };
  const MatrixXd J = test::fd_jacobian(f, y);
  for (int k = 2; k <= k0; ++k) {
    CHECK(J(k, k) == doctest::Approx(p.c(k)));
    CHECK(J(k, k0 - 1 + k) == doctest::Approx(-1.0));
    CHECK(std::abs(J(k0 - 1 + k, k0 - 1 + k)) < 1e-9);
  }
  CHECK(p.c(2) == doctest::Approx(-pi * pi / (4 * 0.49)));
}

TEST_CASE("K1 closed forms") {
  const double rho = 0.5, delta = 5e-3, e0 = 8e-4;
  const K1ClosedForm cf = k1_closed_forms(e0, rho, delta);
  CHECK(cf.T1 == doctest::Approx(sqrt2 / 3 * (1 / e0 - 1 / delta)));
  CHECK(cf.eps1(0) == doctest::Approx(e0));
  CHECK(cf.r1(0) == doctest::Approx(rho));
  CHECK(cf.eps1(cf.T1) == doctest::Approx(delta));
  CHECK_THROWS_AS(k1_closed_forms(delta, rho, delta), OrderingError);

  const int k0 = 2;
  const ChartParams p(k0, 0.5);
  VectorXd y0 = VectorXd::Zero(2 * k0 + 1);
  y0 << -1.0, rho, 0, 0, std::cbrt(e0);
  IntegratorConfig cfg;
  Field f = [&](double, const VectorXd& y) { return VectorXd(rhs_K1_smooth(y, p)); };
  const Trajectory tr = integrate(f, y0, 0, 2 * cf.T1, cfg, {EventSpec::coordinate_equals(2 * k0, std::cbrt(delta))});
  REQUIRE(tr.status == Status::event_terminated);
  CHECK(tr.final_time() == doctest::Approx(cf.T1).epsilon(1e-9));
  for (double t : {0.0, 100.0, 300.0, 490.0}) {
    const VectorXd y = tr.at(t);
    CHECK(y(1) == doctest::Approx(cf.r1(t)).epsilon(1e-8));
    CHECK(std::pow(y(2 * k0), 3) == doctest::Approx(cf.eps1(t)).epsilon(1e-8));
  }
}

TEST_CASE("K3 closed forms") {
  const double rho = 0.5, delta = 5e-3, r_in = 0.05;
  const K3ClosedForm cf = k3_closed_forms(r_in, delta, rho);
  CHECK(cf.T3 == doctest::Approx(std::log(10.0)));
  CHECK_THROWS_AS(k3_closed_forms(rho, delta, rho), OrderingError);

  const int k0 = 3;
  const ChartParams p(k0, 0.5);
  VectorXd y0 = VectorXd::Zero(2 * k0 + 1);
  y0(0) = r_in;
  y0(2 * k0) = std::cbrt(delta);
  Field f = [&](double, const VectorXd& y) { return VectorXd(rhs_K3_time_rescaled(y, p)); };
  const Trajectory tr = integrate(f, y0, 0, 10, IntegratorConfig{}, {EventSpec::coordinate_equals(0, rho)});
  REQUIRE(tr.status == Status::event_terminated);
  CHECK(tr.final_time() == doctest::Approx(cf.T3).epsilon(1e-9));
  const double mu_exit = tr.final_state()(2 * k0);
  CHECK(mu_exit == doctest::Approx(cf.eps3_exit_nominal()).epsilon(1e-8));
  CHECK(std::pow(mu_exit, 3) == doctest::Approx(cf.eps3(cf.T3)).epsilon(1e-8));
  CHECK(std::abs(cf.eps3(cf.T3) - cf.eps3_exit_nominal()) > 1e-3);
}

TEST_CASE("K2 stability window") {
  const StabilityWindow w = k2_stability_window(5e-3, 1e-3, 0.5, 0.5);
  CHECK(w.ok);
  CHECK(w.lower == doctest::Approx(8e-3 / std::pow(pi, 6)));
  CHECK(w.upper == doctest::Approx(8e-3));
  CHECK(w.margin_upper == doctest::Approx(3e-3));
  CHECK_FALSE(k2_stability_window(1e-2, 1e-3, 0.5, 0.5).ok);
  CHECK_FALSE(k2_stability_window(1e-6, 1e-3, 0.5, 0.5).ok);
  // the window is empty once 8 a rho / pi >= 1
  CHECK_FALSE(k2_stability_window(1e-3, 1e-3, 0.5, 2.0).ok);
}

TEST_CASE("chart bound checks") {
  const int k0 = 2;
  Trajectory tr;
  VectorXd y = VectorXd::Zero(2 * k0 + 1);
  y(1) = 0.5;
  y(2 * k0) = 0.1;
  tr.times = {0, 1};
  tr.states = {y, y};
  BoundConstants c;
  CHECK_THROWS_AS(verify_chart_bounds(tr, Chart::K1, k0, c), ConfigError);
  CHECK_THROWS_AS(verify_chart_bounds(tr, Chart::K3, k0, c), ConfigError);
  c.sigma_u = 1.0;
  c.sigma_v = 1.0;
  BoundReport r = verify_chart_bounds(tr, Chart::K1, k0, c);
  CHECK(r.pass);
  CHECK(r.items.size() == 2);
  tr.states[1](2) = 1e3;
  r = verify_chart_bounds(tr, Chart::K1, k0, c);
  CHECK_FALSE(r.pass);
  CHECK(r.items[0].name == "u2_1");
  CHECK(r.items[0].observed == 1e3);
  CHECK(r.max_ratio > 1);

  c.sigma = 0.0;
  tr.states[1](2) = 0;
  CHECK(verify_chart_bounds(tr, Chart::K2, k0, c).pass);
  tr.states[1](3) = 1e-3;
  CHECK_FALSE(verify_chart_bounds(tr, Chart::K2, k0, c).pass);
}

TEST_CASE("q0 lies on the Riccati orbit and maps to the K1 exit section") {
  const double delta = 5e-3;
  for (int k0 : {1, 3}) {
    const ChartState q = q0(delta, k0);
    CHECK(q.chart == Chart::K2);
    CHECK(q.coords(1) == doctest::Approx(std::pow(delta, -2.0 / 3.0)));
    CHECK(q.coords(2 * k0) == 0.0);
    const ChartState s1 = kappa21(q);
    CHECK(s1.coords(2 * k0) == doctest::Approx(delta).epsilon(1e-12));
    CHECK(s1.coords(1) == 0.0);
    CHECK(gamma2_values({q.coords(0)})[0] == doctest::Approx(q.coords(1)).epsilon(1e-10));
  }
  // a K2 orbit started at q0 keeps to gamma_2
  const ChartParams p(1, 0.5);
  const ChartState q = q0(delta, 1);
  Field f = [&](double, const VectorXd& y) { return VectorXd(rhs_K2(y, p)); };
  const Trajectory tr = integrate(f, q.coords, 0, 100, IntegratorConfig{}, {EventSpec::coordinate_equals(0, 2.0)});
  REQUIRE(tr.status == Status::event_terminated);
  CHECK(tr.final_state()(1) == doctest::Approx(gamma2_values({2.0})[0]).epsilon(1e-8));
}

TEST_CASE("linearisations at p_a in K1 and at the origin of K3") {
  for (int k0 : {2, 3, 5}) {
    const ChartParams p(k0, 0.5);
    const Index n = 2 * k0 + 1;
    VectorXd pa = VectorXd::Zero(n);
    pa(0) = -std::pow(2.0, 0.25);
    auto f1 = [&](const VectorXd& y) { return VectorXd(rhs_K1_smooth(y, p)); };
    VectorXd ev = Eigen::EigenSolver<MatrixXd>(test::fd_jacobian(f1, pa), false).eigenvalues().real();
    std::sort(ev.begin(), ev.end());
    for (Index i = 0; i < n; ++i) CHECK(std::abs(ev(i) - (i < k0 ? -std::pow(2.0, 0.75) : 0.0)) < 1e-6);

    auto f3 = [&](const VectorXd& y) { return VectorXd(rhs_K3_time_rescaled(y, p)); };
    ev = Eigen::EigenSolver<MatrixXd>(test::fd_jacobian(f3, VectorXd::Zero(n)), false).eigenvalues().real();
    std::sort(ev.begin(), ev.end());
    for (Index i = 0; i < n; ++i) {
      const double want = i < k0 ? -2.0 : i == k0 ? -1.0 : 1.0;
      CHECK(std::abs(ev(i) - want) < 1e-6);
    }
  }
}

TEST_CASE("gamma_1 leaves p_a along (-1/2, 0, ..., 0, 1)") {
  const int k0 = 3;
  const double u = -80.0;
  ChartState s{Chart::K2, VectorXd::Zero(2 * k0 + 1)};
  s.coords(0) = u;
  s.coords(1) = gamma2_values({u}, -100.0)[0];
  const ChartState g1 = kappa21(s);
  VectorXd d = g1.coords;
  d(0) += std::pow(2.0, 0.25);
  CHECK(d.segment(1, 2 * k0 - 1).isZero());
  const Eigen::Vector2d dir(d(0), d(2 * k0));
  auto angle = [&](Eigen::Vector2d w) { return std::acos(dir.normalized().dot(w.normalized())); };
  CHECK(angle({-0.5, 1.0}) < 1e-3);
  // the direction (-1, ..., 1) is 0.32 rad away
  CHECK(angle({-1.0, 1.0}) > 0.3);
}
