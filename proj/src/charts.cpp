#include "gfold/charts.hpp"

#include <algorithm>
#include <cmath>

namespace gfold {

const char* to_string(Chart c) {
  switch (c) {
    case Chart::K1:
      return "k1";
    case Chart::K2:
      return "k2";
    case Chart::K3:
      return "k3";
  }
  return "?";
}

Chart chart_from_string(const std::string& s) {
  if (s == "k1" || s == "K1") return Chart::K1;
  if (s == "k2" || s == "K2") return Chart::K2;
  if (s == "k3" || s == "K3") return Chart::K3;
  throw ConfigError("unknown chart '" + s + "'");
}

std::vector<std::string> chart_names(Chart c, int k0) {
  const std::string i = c == Chart::K1 ? "1" : c == Chart::K2 ? "2" : "3";
  std::vector<std::string> n;
  switch (c) {
    case Chart::K1:
      n = {"u1_1", "r1"};
      break;
    case Chart::K2:
      n = {"u1_2", "v1_2"};
      break;
    case Chart::K3:
      n = {"r3", "v1_3"};
      break;
  }
  for (int k = 2; k <= k0; ++k) n.push_back("u" + std::to_string(k) + "_" + i);
  for (int k = 2; k <= k0; ++k) n.push_back("v" + std::to_string(k) + "_" + i);
  n.push_back(c == Chart::K1 ? "eps1" : c == Chart::K2 ? "r2" : "eps3");
  return n;
}

namespace {

void check_state(const ChartState& s) {
  if (s.coords.size() < 3 || s.coords.size() % 2 == 0)
    throw ShapeError("chart state: length must be 2 k0 + 1");
}

}  // namespace

Downstairs blowdown(const ChartState& s) {
  check_state(s);
  const int k0 = s.k0(), m = k0 - 1;
  const VectorXd& y = s.coords;
  Downstairs d{VectorXd(k0), VectorXd(k0), 0.0};
  double r = 0.0;
  switch (s.chart) {
    case Chart::K1:
      r = y(1);
      d.u(0) = r * y(0);
      d.v(0) = r * r;
      d.eps = r * r * r * y(2 * k0);
      break;
    case Chart::K2:
      r = y(2 * k0);
      d.u(0) = r * y(0);
      d.v(0) = r * r * y(1);
      d.eps = r * r * r;
      break;
    case Chart::K3:
      r = y(0);
      d.u(0) = r;
      d.v(0) = r * r * y(1);
      d.eps = r * r * r * y(2 * k0);
      break;
  }
  for (int j = 0; j < m; ++j) {
    d.u(1 + j) = r * y(2 + j);
    d.v(1 + j) = r * r * y(2 + m + j);
  }
  return d;
}

ChartState lift_to_chart(const VectorXd& u, const VectorXd& v, double eps, Chart c) {
  const Index k0 = u.size();
  require_shape(v.size(), k0, "lift_to_chart");
  if (k0 < 1) throw ShapeError("lift_to_chart: empty state");
  const int m = static_cast<int>(k0) - 1;
  ChartState s{c, VectorXd(2 * k0 + 1)};
  VectorXd& y = s.coords;
  double r = 0.0;
  switch (c) {
    case Chart::K1:
      if (!(v(0) > 0)) throw ChartDomainError("lift_to_chart: K1 needs v1 > 0");
      r = std::sqrt(v(0));
      y(0) = u(0) / r;
      y(1) = r;
      y(2 * k0) = eps / (r * r * r);
      break;
    case Chart::K2:
      if (!(eps > 0)) throw ChartDomainError("lift_to_chart: K2 needs eps > 0");
      r = std::cbrt(eps);
      y(0) = u(0) / r;
      y(1) = v(0) / (r * r);
      y(2 * k0) = r;
      break;
    case Chart::K3:
      if (!(u(0) > 0)) throw ChartDomainError("lift_to_chart: K3 needs u1 > 0");
      r = u(0);
      y(0) = r;
      y(1) = v(0) / (r * r);
      y(2 * k0) = eps / (r * r * r);
      break;
  }
  for (int j = 0; j < m; ++j) {
    y(2 + j) = u(1 + j) / r;
    y(2 + m + j) = v(1 + j) / (r * r);
  }
  return s;
}

VectorXd to_smooth(const ChartState& s) {
  check_state(s);
  VectorXd y = s.coords;
  if (s.chart != Chart::K2) {
    const Index e = y.size() - 1;
    if (y(e) < 0) throw ChartDomainError("to_smooth: eps coordinate must be nonnegative");
    y(e) = std::cbrt(y(e));
  }
  return y;
}

ChartState from_smooth(Chart c, const VectorXd& y) {
  ChartState s{c, y};
  if (c != Chart::K2) {
    const Index e = y.size() - 1;
    s.coords(e) = y(e) * y(e) * y(e);
  }
  return s;
}

ChartState kappa12(const ChartState& s) {
  check_state(s);
  if (s.chart != Chart::K1) throw ChartDomainError("kappa12: expects a K1 state");
  if (!(s.coords(s.coords.size() - 1) > 0)) throw ChartDomainError("kappa12: needs eps1 > 0");
  return {Chart::K2, kappa12_smooth(to_smooth(s), s.k0())};
}

ChartState kappa21(const ChartState& s) {
  check_state(s);
  if (s.chart != Chart::K2) throw ChartDomainError("kappa21: expects a K2 state");
  const int k0 = s.k0(), m = k0 - 1;
  const VectorXd& y = s.coords;
  const double v12 = y(1);
  if (!(v12 > 0)) throw ChartDomainError("kappa21: needs v12 > 0");
  const double q = std::sqrt(v12);
  ChartState out{Chart::K1, VectorXd(2 * k0 + 1)};
  VectorXd& z = out.coords;
  z(0) = y(0) / q;
  z(1) = q * y(2 * k0);
  for (int j = 0; j < m; ++j) {
    z(2 + j) = y(2 + j) / q;
    z(2 + m + j) = y(2 + m + j) / v12;
  }
  z(2 * k0) = 1.0 / (v12 * q);
  return out;
}

ChartState kappa23(const ChartState& s) {
  check_state(s);
  if (s.chart != Chart::K2) throw ChartDomainError("kappa23: expects a K2 state");
  if (!(s.coords(0) > 0)) throw ChartDomainError("kappa23: needs u12 > 0");
  return from_smooth(Chart::K3, kappa23_smooth(s.coords, s.k0()));
}

ChartState kappa32(const ChartState& s) {
  check_state(s);
  if (s.chart != Chart::K3) throw ChartDomainError("kappa32: expects a K3 state");
  const int k0 = s.k0(), m = k0 - 1;
  const VectorXd& y = s.coords;
  if (!(y(2 * k0) > 0)) throw ChartDomainError("kappa32: needs eps3 > 0");
  const double mu = std::cbrt(y(2 * k0));
  ChartState out{Chart::K2, VectorXd(2 * k0 + 1)};
  VectorXd& z = out.coords;
  z(0) = 1.0 / mu;
  z(1) = y(1) / (mu * mu);
  for (int j = 0; j < m; ++j) {
    z(2 + j) = y(2 + j) / mu;
    z(2 + m + j) = y(2 + m + j) / (mu * mu);
  }
  z(2 * k0) = y(0) * mu;
  return out;
}

double K1ClosedForm::eps1(double t) const { return 2.0 * eps1_0 / (2.0 - 3.0 * sqrt2 * eps1_0 * t); }

double K1ClosedForm::r1(double t) const {
  return std::cbrt(0.5) * rho * std::cbrt(2.0 - 3.0 * sqrt2 * eps1_0 * t);
}

K1ClosedForm k1_closed_forms(double eps1_0, double rho, double delta) {
  if (!(eps1_0 > 0) || !(eps1_0 < delta)) throw OrderingError("k1_closed_forms: need 0 < eps1(0) < delta");
  return {eps1_0, rho, delta, sqrt2 / 3.0 * (1.0 / eps1_0 - 1.0 / delta)};
}

K3ClosedForm k3_closed_forms(double r3_in, double delta, double rho) {
  if (!(r3_in > 0) || !(r3_in < rho)) throw OrderingError("k3_closed_forms: need 0 < r3_in < rho");
  return {r3_in, delta, rho, std::log(rho / r3_in)};
}

StabilityWindow k2_stability_window(double delta, double eps0, double rho, double a) {
  StabilityWindow w;
  const double a2 = a * a;
  w.lower = 512.0 * a2 * a2 * a2 / std::pow(pi, 6) * eps0;
  w.upper = eps0 / (rho * rho * rho);
  w.margin_lower = delta - w.lower;
  w.margin_upper = w.upper - delta;
  w.ok = w.lower < delta && delta < w.upper;
  return w;
}

namespace {

struct Tracker {
  std::string name;
  double ratio = 0.0, bound = 0.0, observed = 0.0;
  void add(double obs, double bnd) {
    const double o = std::abs(obs);
    double r = 0.0;
    if (bnd > 0)
      r = o / bnd;
    else if (o > 0)
      r = std::numeric_limits<double>::infinity();
    if (r >= ratio) {
      ratio = r;
      bound = bnd;
      observed = o;
    }
  }
};

BoundReport finish(std::vector<Tracker>& ts) {
  BoundReport rep;
  for (auto& t : ts) {
    rep.items.push_back({t.name, t.bound, t.observed, t.ratio <= 1.0});
    rep.max_ratio = std::max(rep.max_ratio, t.ratio);
  }
  rep.pass = rep.max_ratio <= 1.0;
  return rep;
}

}  // namespace

BoundReport verify_chart_bounds(const Trajectory& traj, Chart chart, int k0, const BoundConstants& c) {
  if (traj.states.empty()) throw DomainError("verify_chart_bounds: empty trajectory");
  require_shape(traj.states.front().size(), 2 * k0 + 1, "verify_chart_bounds");
  const int m = k0 - 1;
  const double a2 = c.a * c.a;
  const VectorXd& y0 = traj.states.front();
  std::vector<Tracker> ts;
  if (chart == Chart::K1) {
    if (!c.sigma_u || !c.sigma_v) throw ConfigError("verify_chart_bounds: K1 needs sigma_u and sigma_v");
    const double su = *c.sigma_u, sv = *c.sigma_v;
    const double mu0 = y0(2 * k0), r0 = y0(1);
    const double e23 = mu0 * mu0;  // eps1(0)^{2/3}
    const double d23 = std::pow(c.delta, 2.0 / 3.0);
    for (int k = 2; k <= k0; ++k) {
      const double bk = std::abs(b_coefficient(k));
      const double uk0 = r0 * y0(k), vk0 = r0 * r0 * y0(m + k);
      const double bu = std::abs(uk0) / c.rho +
                        8.0 * a2 * c.rho / bk *
                            (su + sv * e23 * c.rho * c.rho * d23 * (1.0 + 8.0 * a2 / bk));
      const double bv = d23 / (e23 * c.rho * c.rho) * std::abs(vk0) + e23 * d23 * 8.0 * a2 * c.rho * c.rho / bk * sv;
      Tracker tu{"u" + std::to_string(k) + "_1"}, tv{"v" + std::to_string(k) + "_1"};
      for (const auto& y : traj.states) {
        tu.add(y(k), bu);
        tv.add(y(m + k), bv);
      }
      ts.push_back(tu);
      ts.push_back(tv);
    }
  } else if (chart == Chart::K2) {
    if (!c.sigma) throw ConfigError("verify_chart_bounds: K2 needs sigma");
    const double s = *c.sigma;
    const double r0 = y0(2 * k0);
    if (!(r0 > 0)) throw DomainError("verify_chart_bounds: K2 needs r2(0) > 0");
    const double t0 = traj.times.front();
    for (int k = 2; k <= k0; ++k) {
      const double bk = b_coefficient(k), ab = std::abs(bk);
      const double uk0 = std::abs(y0(k)), vk0 = std::abs(y0(m + k));
      Tracker tu{"u" + std::to_string(k) + "_2"}, tv{"v" + std::to_string(k) + "_2"};
      for (std::size_t n = 0; n < traj.states.size(); ++n) {
        const double t = traj.times[n] - t0;
        const double bu = std::exp(bk * t / (16.0 * a2 * r0)) * uk0 +
                          16.0 * a2 * r0 / ab * (vk0 + (1.0 + 4.0 * a2 * r0 * r0 / ab) * s);
        const double bv = std::exp(bk / (4.0 * a2) * r0 * r0 * t) * vk0 + 4.0 * a2 * r0 * r0 * s / ab;
        tu.add(traj.states[n](k), bu);
        tv.add(traj.states[n](m + k), bv);
      }
      ts.push_back(tu);
      ts.push_back(tv);
    }
  } else {
    throw ConfigError("verify_chart_bounds: estimates are stated for K1 and K2 only");
  }
  return finish(ts);
}

}  // namespace gfold
