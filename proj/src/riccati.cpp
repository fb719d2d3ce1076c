#include "gfold/riccati.hpp"

#include <algorithm>
#include <cmath>

namespace gfold {

namespace {

VectorXd planar(double, const VectorXd& y) {
  VectorXd d(2);
  d << -y(1) + y(0) * y(0) / sqrt2, -sqrt2;
  return d;
}

IntegratorConfig tight(double tol) {
  IntegratorConfig cfg;
  cfg.rel_tol = tol;
  cfg.abs_tol = tol;
  cfg.blowup_norm = 1e12;
  return cfg;
}

// Start far enough left that the series remainder is negligible against the target.
VectorXd start_point(double u_start) {
  if (!(u_start <= -20.0)) throw DomainError("gamma2: u_start must be <= -20");
  VectorXd y(2);
  y << u_start, gamma2_left_series(u_start);
  return y;
}

Trajectory shoot(double u_start, double tol, std::vector<EventSpec> ev, double horizon = 1e4) {
  Trajectory tr = integrate(planar, start_point(u_start), 0.0, horizon, tight(tol), ev);
  return tr;
}

}  // namespace

std::vector<double> gamma2_values(const std::vector<double>& us, double u_start, double tol) {
  if (us.empty()) return {};
  if (!std::is_sorted(us.begin(), us.end()) || !(us.front() > u_start))
    throw DomainError("gamma2_values: sample points must be ascending and right of u_start");
  std::vector<EventSpec> ev;
  for (double u : us) ev.push_back(EventSpec::coordinate_equals(0, u, "u", Direction::increasing, false));
  ev.push_back(EventSpec::coordinate_equals(0, us.back() + 1.0, "stop", Direction::increasing, true));
  Trajectory tr = shoot(u_start, tol, ev);
  std::vector<double> s;
  for (const auto& e : tr.events)
    if (e.id == "u") s.push_back(e.y(1));
  if (s.size() != us.size()) throw ShootingError("gamma2_values: orbit did not reach every sample point");
  return s;
}

double omega0_direct(double u_start, double tol) {
  // Past u = 20 switch to w = 1/u, where the orbit reaches w = 0 in finite time.
  const auto s20 = gamma2_values({20.0}, u_start, tol);
  VectorXd y(2);
  y << 1.0 / 20.0, s20.front();
  Field g = [](double, const VectorXd& z) {
    VectorXd d(2);
    d << z(1) * z(0) * z(0) - 1.0 / sqrt2, -sqrt2;
    return d;
  };
  IntegratorConfig cfg = tight(tol);
  cfg.abs_tol = tol * 1e-2;
  Trajectory tr = integrate(g, y, 0.0, 100.0, cfg, {EventSpec::coordinate_equals(0, 0.0, "w0")});
  if (tr.status != Status::event_terminated) throw ShootingError("omega0_direct: w = 0 not reached");
  return -tr.final_state()(1);
}

double omega0_richardson(double u_start, double tol) {
  const std::vector<double> us{20.0, 40.0, 80.0};
  const auto s = gamma2_values(us, u_start, tol);
  Eigen::Matrix3d M;
  Eigen::Vector3d b;
  for (int i = 0; i < 3; ++i) {
    const double w = 1.0 / us[i];
    M.row(i) << 1.0, w * w * w, w * w * w * w;
    b(i) = -(s[i] - 2.0 / us[i]);
  }
  return M.colPivHouseholderQr().solve(b)(0);
}

double decay_exponent(const std::vector<double>& u, const std::vector<double>& r) {
  if (u.size() != r.size() || u.size() < 2) throw EstimationError("decay_exponent: need two or more points");
  double mx = 0, my = 0;
  const double n = static_cast<double>(u.size());
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!(std::abs(r[i]) > 0)) throw EstimationError("decay_exponent: zero residual");
    lx.push_back(std::log(std::abs(u[i])));
    ly.push_back(std::log(std::abs(r[i])));
    mx += lx.back() / n;
    my += ly.back() / n;
  }
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  return -sxy / sxx;
}

RiccatiOrbit riccati_gamma2(double u_start, double u_end, double tol) {
  if (!(u_end >= 20.0)) throw DomainError("riccati_gamma2: u_end must be >= 20");
  RiccatiOrbit o;
  Trajectory tr = shoot(u_start, tol, {EventSpec::coordinate_equals(0, u_end, "end", Direction::increasing)});
  if (tr.status != Status::event_terminated) throw ShootingError("riccati_gamma2: orbit did not reach u_end");
  for (const auto& y : tr.states) {
    o.u.push_back(y(0));
    o.s.push_back(y(1));
  }
  o.omega0_direct = omega0_direct(u_start, tol);
  o.omega0_richardson = omega0_richardson(u_start, tol);
  o.omega0 = o.omega0_richardson;

  std::vector<double> left{-40.0, -28.0, -20.0, -14.0, -10.0};
  left.erase(std::remove_if(left.begin(), left.end(), [&](double u) { return u <= u_start; }), left.end());
  const std::vector<double> right{10.0, 14.0, 20.0, 28.0, 40.0};
  std::vector<double> pts = left;
  pts.insert(pts.end(), right.begin(), right.end());
  const auto s = gamma2_values(pts, u_start, tol);

  auto fill = [&](AsymptoticFit& f, double c, bool is_left) {
    f.coefficient = c;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double u = pts[i];
      if ((u < 0) != is_left) continue;
      f.u.push_back(u);
      f.residual.push_back(is_left ? s[i] - u * u / sqrt2 - c / u : s[i] + o.omega0 - c / u);
    }
    f.exponent = f.u.size() >= 2 ? decay_exponent(f.u, f.residual) : 0.0;
  };
  if (left.size() >= 2) {
    fill(o.left_nominal, 1.0 / sqrt2, true);
    fill(o.left_corrected, 1.0, true);
  }
  fill(o.right_nominal, sqrt2, false);
  fill(o.right_corrected, 2.0, false);
  return o;
}

ChartState q0(double delta, int k0, double tol) {
  if (!(delta > 0) || k0 < 1) throw DomainError("q0: need delta > 0 and k0 >= 1");
  const double V = std::pow(delta, -2.0 / 3.0);
  // On the left branch s ~ 2^{-1/2} u^2, so start well past the crossing.
  const double u_start = std::min(-50.0, -4.0 * std::sqrt(sqrt2 * V));
  Trajectory tr = shoot(u_start, tol, {EventSpec::coordinate_equals(1, V, "v", Direction::decreasing)});
  if (tr.status != Status::event_terminated) throw ShootingError("q0: gamma2 does not cross the section");
  ChartState q{Chart::K2, VectorXd::Zero(2 * k0 + 1)};
  q.coords(0) = tr.final_state()(0);
  q.coords(1) = V;
  return q;
}

}  // namespace gfold
