#include "gfold/transition.hpp"

#include "gfold/riccati.hpp"
#include "gfold/vectorfields.hpp"

#include <unsupported/Eigen/AutoDiff>

#include <algorithm>
#include <cmath>

namespace gfold {

namespace {

using AD2 = Eigen::AutoDiffScalar<Eigen::Vector2d>;
using AD1 = Eigen::AutoDiffScalar<Eigen::Matrix<double, 1, 1>>;

// Unit tangent carried perpendicular to the flow, with accumulated log growth.
struct Tangent {
  VectorXd psi;
  double ell = 0.0;
  bool projected = false;
};

template <class M>
VectorXd jvp(M map, const VectorXd& y, const VectorXd& v) {
  Vec<AD1> x(y.size());
  for (Index i = 0; i < y.size(); ++i) x(i) = AD1(y(i), Eigen::Matrix<double, 1, 1>(v(i)));
  const Vec<AD1> z = map(x);
  VectorXd out(z.size());
  for (Index i = 0; i < z.size(); ++i) out(i) = z(i).derivatives()(0);
  return out;
}

void reproject(Tangent& tg, const VectorXd& f) {
  const double ff = f.squaredNorm();
  if (ff > 0) tg.psi -= f * (f.dot(tg.psi) / ff);
  const double nrm = tg.psi.norm();
  if (!(nrm > 0)) throw EstimationError("variational tangent collapsed onto the flow");
  tg.ell += std::log(nrm);
  tg.psi /= nrm;
}

// Unprojected: psi' = J psi - ell' psi, ell' = psi.J psi / |psi|^2, used where the slow and radial
// coordinates do not depend on u so equal-time comparison is exact.
// Projected: J psi is replaced by P psi = J psi - f [(J f).psi + f.(J psi)] / |f|^2 and a term
// -kappa f (f.psi) / |f|^2 pulls psi back onto the complement of f; terms along f leave psi mod f unchanged.
template <class F>
Field tangent_field(F f, Index n, bool projected) {
  return [f, n, projected](double, const VectorXd& Y) -> VectorXd {
    const VectorXd y = Y.head(n), psi = Y.segment(n, n);
    const VectorXd fy = f(y);
    Vec<AD2> x(n);
    for (Index i = 0; i < n; ++i) x(i) = AD2(y(i), Eigen::Vector2d(psi(i), fy(i)));
    const Vec<AD2> fx = f(x);
    VectorXd Jpsi(n), Jf(n);
    for (Index i = 0; i < n; ++i) {
      Jpsi(i) = fx(i).derivatives()(0);
      Jf(i) = fx(i).derivatives()(1);
    }
    VectorXd d(2 * n + 1);
    if (!projected) {
      const double g = psi.dot(Jpsi) / psi.squaredNorm();
      d << fy, Jpsi - g * psi, g;
      return d;
    }
    const double ff = fy.squaredNorm();
    const VectorXd P = Jpsi - fy * ((Jf.dot(psi) + fy.dot(Jpsi)) / ff);
    const double g = psi.dot(P) / psi.squaredNorm();
    const double kappa = 1.0 + 2.0 * std::abs(g);
    d << fy, P - g * psi - fy * (kappa * fy.dot(psi) / ff), g;
    return d;
  };
}

void strip(Trajectory& tr, Index n) {
  for (auto& y : tr.states) y = y.head(n).eval();
  for (auto& e : tr.events) e.y = e.y.head(n).eval();
  for (auto& s : tr.segments) {
    s.r1 = s.r1.head(n).eval();
    s.r2 = s.r2.head(n).eval();
    s.r3 = s.r3.head(n).eval();
    s.r4 = s.r4.head(n).eval();
    s.r5 = s.r5.head(n).eval();
  }
}

template <class F>
Trajectory run_stage(const std::string& label, F f, const VectorXd& y0, Tangent* tg, double horizon,
                     const IntegratorConfig& cfg, const EventSpec& ev) {
  const Index n = y0.size();
  Trajectory tr;
  try {
    if (tg) {
      if (tg->projected)
        reproject(*tg, f(y0));
      else
        reproject(*tg, VectorXd::Zero(n));
      VectorXd Y(2 * n + 1);
      Y << y0, tg->psi, 0.0;
      tr = integrate(tangent_field(f, n, tg->projected), Y, 0.0, horizon, cfg, {ev});
    } else {
      tr = integrate([f](double, const VectorXd& y) -> VectorXd { return f(y); }, y0, 0.0, horizon, cfg, {ev});
    }
  } catch (const IntegrationError& e) {
    throw TransitionError(label, e.what(), e.last_state.head(std::min(n, e.last_state.size())));
  } catch (const SingularRescaleError& e) {
    throw TransitionError(label, e.what());
  }
  if (tr.status != Status::event_terminated)
    throw TransitionError(label, std::string("exit section not reached (") + to_string(tr.status) + ")",
                          tr.final_state().head(n));
  if (tg) {
    const VectorXd& Y = tr.final_state();
    tg->psi = Y.segment(n, n);
    tg->ell += Y(2 * n);
    strip(tr, n);
  }
  return tr;
}

auto k1_field(const ChartParams& p) {
  return [&p](const auto& y) { return rhs_K1_smooth(y, p); };
}
auto k2_field(const ChartParams& p) {
  return [&p](const auto& y) { return rhs_K2(y, p); };
}
auto k3_field(const ChartParams& p) {
  return [&p](const auto& y) { return rhs_K3_time_rescaled(y, p); };
}

void check_chart(const ChartState& s, Chart c, const ChartParams& p, const char* what) {
  if (s.chart != c) throw DomainError(std::string(what) + ": wrong chart");
  require_shape(s.coords.size(), 2 * p.k0() + 1, what);
}

Trajectory pi1_traj(const ChartState& entry, const ChartParams& p, double delta, const IntegratorConfig& cfg,
                    Tangent* tg) {
  check_chart(entry, Chart::K1, p, "pi1");
  const double e1 = entry.coords(2 * p.k0());
  if (!(e1 > 0) || !(e1 < delta)) throw OrderingError("pi1: need 0 < eps1 < delta");
  const double T1 = sqrt2 / 3.0 * (1.0 / e1 - 1.0 / delta);
  return run_stage("pi1", k1_field(p), to_smooth(entry), tg, 2.0 * T1 + 10.0, cfg,
                   EventSpec::coordinate_equals(2 * p.k0(), std::cbrt(delta), "eps1=delta", Direction::increasing));
}

Trajectory pi2_traj(const ChartState& entry, const ChartParams& p, double U, const IntegratorConfig& cfg,
                    Tangent* tg) {
  check_chart(entry, Chart::K2, p, "pi2");
  if (!(entry.coords(0) < U)) throw OrderingError("pi2: entry already past the exit section");
  return run_stage("pi2", k2_field(p), entry.coords, tg, 1e4, cfg,
                   EventSpec::coordinate_equals(0, U, "u12=exit", Direction::increasing));
}

Trajectory pi3_traj(const ChartState& entry, const ChartParams& p, double rho, const IntegratorConfig& cfg,
                    Tangent* tg) {
  check_chart(entry, Chart::K3, p, "pi3");
  const double r3 = entry.coords(0);
  if (!(r3 > 0) || !(r3 < rho)) throw OrderingError("pi3: need 0 < r3 < rho");
  if (!(entry.coords(2 * p.k0()) >= 0)) throw ChartDomainError("pi3: eps3 must be nonnegative");
  return run_stage("pi3", k3_field(p), to_smooth(entry), tg, 2.0 * std::log(rho / r3) + 10.0, cfg,
                   EventSpec::coordinate_equals(0, rho, "r3=rho", Direction::increasing));
}

StageResult finish(Chart c, Trajectory tr) {
  StageResult r;
  r.exit = from_smooth(c, tr.final_state());
  r.time = tr.final_time();
  r.traj = std::move(tr);
  return r;
}

VectorXd flat(const Downstairs& d) {
  VectorXd z(d.u.size() + d.v.size());
  z << d.u, d.v;
  return z;
}

BoundItem item(std::string name, double bound, double observed) {
  observed = std::abs(observed);
  return {std::move(name), bound, observed, observed <= bound};
}

}  // namespace

StageResult pi1(const ChartState& entry, const ChartParams& p, double delta, const IntegratorConfig& cfg) {
  return finish(Chart::K1, pi1_traj(entry, p, delta, cfg, nullptr));
}

StageResult pi2(const ChartState& entry, const ChartParams& p, double delta, const IntegratorConfig& cfg,
                std::optional<double> u_exit) {
  return finish(Chart::K2, pi2_traj(entry, p, u_exit.value_or(std::cbrt(1.0 / delta)), cfg, nullptr));
}

StageResult pi3(const ChartState& entry, const ChartParams& p, double rho, const IntegratorConfig& cfg) {
  return finish(Chart::K3, pi3_traj(entry, p, rho, cfg, nullptr));
}

void TransitionParams::validate() const {
  if (k0 < 1) throw ConfigError("transition: k0 must be >= 1");
  if (!(a > 0) || !(eps > 0) || !(rho > 0)) throw ConfigError("transition: a, eps, rho must be positive");
  if (!(delta > 0) || !(delta < 1)) throw ConfigError("transition: delta must lie in (0, 1)");
  if (!(C_in_u1 > 0) || !(C_in_uk > 0) || !(C_in_vk > 0) || !(C_out > 0))
    throw ConfigError("transition: C constants must be positive");
  if (!(sigma > 0) || !(sigma <= 1)) throw ConfigError("transition: sigma must lie in (0, 1]");
  if (!(exit_constant > 0) || !(spread_du > 0))
    throw ConfigError("transition: exit_constant and spread_du must be positive");
}

Downstairs make_entry(const TransitionParams& p, double du1, double uk_frac, double vk_frac) {
  Downstairs d{VectorXd::Zero(p.k0), VectorXd::Zero(p.k0), p.eps};
  d.u(0) = -std::pow(2.0, 0.25) * p.rho + du1;
  d.v(0) = p.rho * p.rho;
  for (int k = 1; k < p.k0; ++k) {
    d.u(k) = uk_frac * p.C_in_uk;
    d.v(k) = vk_frac * p.C_in_vk * std::pow(p.eps, 4.0 / 3.0);
  }
  return d;
}

bool in_entry_region(const Downstairs& d, const TransitionParams& p) {
  if (d.u.size() != p.k0 || d.v.size() != p.k0) return false;
  if (!(std::abs(d.u(0) + std::pow(2.0, 0.25) * p.rho) < p.C_in_u1)) return false;
  if (!(std::abs(d.v(0) - p.rho * p.rho) <= 1e-12 * p.rho * p.rho)) return false;
  const double vb = p.C_in_vk * std::pow(p.eps, 4.0 / 3.0);
  for (int k = 1; k < p.k0; ++k)
    if (!(std::abs(d.u(k)) <= p.C_in_uk) || !(std::abs(d.v(k)) <= vb)) return false;
  return true;
}

TransitionReport full_transition(const Downstairs& entry, const TransitionParams& p, const IntegratorConfig& cfg) {
  p.validate();
  const int k0 = p.k0, m = k0 - 1;
  if (!in_entry_region(entry, p)) throw DomainError("full_transition: entry outside R^in");
  const ChartParams cp = ChartParams::from_domain(k0, p.a, p.eps);
  const double eps = p.eps;

  TransitionReport rep;
  rep.entry = entry;
  rep.entry.eps = eps;
  Tangent tg;
  Tangent* tp = p.variational ? &tg : nullptr;
  VectorXd e1 = VectorXd::Zero(2 * k0);
  e1(0) = 1.0;

  auto record = [&](const std::string& label, Chart c, const Trajectory& tr) {
    StageRecord s;
    s.label = label;
    s.chart = c;
    s.time = tr.final_time();
    s.entry = from_smooth(c, tr.states.front()).coords;
    s.exit = from_smooth(c, tr.final_state()).coords;
    s.eps_entry = blowdown({c, s.entry}).eps;
    s.eps_exit = blowdown({c, s.exit}).eps;
    rep.time += s.time;
    rep.path.push_back(c);
    rep.stages.push_back(s);
  };
  auto add_bounds = [&](const std::string& prefix, const BoundReport& b) {
    for (auto it : b.items) {
      it.name = prefix + it.name;
      rep.bounds.push_back(it);
    }
  };

  VectorXd y2;
  if (eps / std::pow(p.rho, 3) < p.delta) {
    const ChartState s1 = lift_to_chart(entry.u, entry.v, eps, Chart::K1);
    if (tp) {
      const double mu = std::cbrt(eps);
      tg.psi = jvp(
          [&](const auto& z) {
            using S = typename std::decay_t<decltype(z)>::Scalar;
            Vec<S> y(2 * k0 + 1);
            using std::sqrt;
            const S r = sqrt(z(k0));
            y(0) = z(0) / r;
            y(1) = r;
            for (int j = 0; j < m; ++j) {
              y(2 + j) = z(1 + j) / r;
              y(2 + m + j) = z(k0 + 1 + j) / (r * r);
            }
            y(2 * k0) = mu / r;
            return y;
          },
          flat(entry), e1);
    }
    const Trajectory t1 = pi1_traj(s1, cp, p.delta, cfg, tp);
    record("pi1", Chart::K1, t1);
    BoundConstants bc{p.a, p.rho, p.delta, p.sigma, p.sigma, p.sigma};
    add_bounds("pi1 ", verify_chart_bounds(t1, Chart::K1, k0, bc));
    const VectorXd& x1 = t1.final_state();
    rep.bounds.push_back(item("pi1 u11_out", p.C_out, x1(0) + std::pow(2.0, 0.25)));
    for (int k = 2; k <= k0; ++k)
      rep.bounds.push_back(item("pi1 v" + std::to_string(k) + "_1_out", p.C_out * std::pow(p.delta, 2.0 / 3.0),
                                x1(m + k)));
    y2 = kappa12_smooth(x1, k0);
    if (tp) tg.psi = jvp([&](const auto& z) { return kappa12_smooth(z, k0); }, x1, tg.psi);
  } else {
    y2 = lift_to_chart(entry.u, entry.v, eps, Chart::K2).coords;
    if (tp) {
      const double r = std::cbrt(eps);
      tg.psi = jvp(
          [&](const auto& z) {
            using S = typename std::decay_t<decltype(z)>::Scalar;
            Vec<S> y(2 * k0 + 1);
            y(0) = z(0) / r;
            y(1) = z(k0) / (r * r);
            for (int j = 0; j < m; ++j) {
              y(2 + j) = z(1 + j) / r;
              y(2 + m + j) = z(k0 + 1 + j) / (r * r);
            }
            y(2 * k0) = S(r);
            return y;
          },
          flat(entry), e1);
    }
  }

  const double r2 = y2(2 * k0);
  const double U_delta = std::cbrt(1.0 / p.delta);
  const bool exit_in_k2 = p.rho / r2 <= U_delta;
  const Trajectory t2 = pi2_traj({Chart::K2, y2}, cp, exit_in_k2 ? p.rho / r2 : U_delta, cfg, tp);
  record("pi2", Chart::K2, t2);
  {
    BoundConstants bc{p.a, p.rho, p.delta, p.sigma, p.sigma, p.sigma};
    add_bounds("pi2 ", verify_chart_bounds(t2, Chart::K2, k0, bc));
  }
  const VectorXd& x2 = t2.final_state();
  rep.v12_exit = x2(1);
  rep.v12_predicted = -omega0_golden + sqrt2 * std::cbrt(p.delta);

  VectorXd w;  // downstairs tangent at the exit
  if (exit_in_k2) {
    rep.exit = blowdown({Chart::K2, x2});
    if (tp)
      w = jvp(
          [&](const auto& y) {
            using S = typename std::decay_t<decltype(y)>::Scalar;
            Vec<S> z(2 * k0);
            const S r = y(2 * k0);
            z(0) = r * y(0);
            z(k0) = r * r * y(1);
            for (int j = 0; j < m; ++j) {
              z(1 + j) = r * y(2 + j);
              z(k0 + 1 + j) = r * r * y(2 + m + j);
            }
            return z;
          },
          x2, tg.psi);
  } else {
    const VectorXd y3 = kappa23_smooth(x2, k0);
    if (tp) tg.psi = jvp([&](const auto& z) { return kappa23_smooth(z, k0); }, x2, tg.psi);
    const ChartState s3 = from_smooth(Chart::K3, y3);
    tg.projected = true;  // r3 = u1: equal-time comparison no longer holds
    const Trajectory t3 = pi3_traj(s3, cp, p.rho, cfg, tp);
    record("pi3", Chart::K3, t3);
    const VectorXd& x3 = t3.final_state();
    const double r3_in = y3(0), ratio = r3_in / p.rho;
    rep.eps3_exit = std::pow(x3(2 * k0), 3);
    rep.eps3_exit_exact = s3.coords(2 * k0) * ratio * ratio * ratio;
    rep.eps3_exit_nominal = std::cbrt(s3.coords(2 * k0)) * ratio;
    rep.bounds.push_back(item("pi3 v1_3_out", ratio * ratio * (std::abs(y3(1)) + p.C_out), x3(1)));
    rep.exit = blowdown(from_smooth(Chart::K3, x3));
    if (tp) w = jvp([&](const auto& y) { return blowdown_K3_smooth(y, k0); }, x3, tg.psi);
  }
  rep.exit.eps = eps;

  rep.v1_out = std::abs(rep.exit.v(0));
  rep.exit_residual = std::abs(rep.exit.u(0) - p.rho);
  const double C = p.exit_constant;
  rep.bounds.push_back(item("v1_out", C * std::pow(eps, 2.0 / 3.0), rep.exit.v(0)));
  for (int k = 2; k <= k0; ++k) {
    rep.bounds.push_back(item("u" + std::to_string(k) + "_out", C * std::abs(entry.u(k - 1)), rep.exit.u(k - 1)));
    rep.bounds.push_back(item("v" + std::to_string(k) + "_out", C * std::abs(entry.v(k - 1)), rep.exit.v(k - 1)));
  }
  rep.bounds_pass = std::all_of(rep.bounds.begin(), rep.bounds.end(), [](const BoundItem& b) { return b.pass; });

  for (const auto& s : rep.stages)
    for (double e : {s.eps_entry, s.eps_exit}) rep.eps_drift = std::max(rep.eps_drift, std::abs(e - eps) / eps);

  if (tp) {
    // Slide along the downstairs flow back onto u1 = rho.
    ModelParams mp(k0, p.a, eps);
    const VectorXd F = rhs_rescaled(flat(rep.exit), mp);
    const VectorXd proj = w - F * (w(0) / F(0));
    rep.log_spread = tg.ell + std::log(proj.norm()) + std::log(p.spread_du);
  }
  return rep;
}

ContractionReport contraction(const TransitionParams& p, const IntegratorConfig& cfg, double uk_frac,
                              double vk_frac) {
  TransitionParams pv = p, pd = p;
  pv.variational = true;
  pd.variational = false;
  const TransitionReport a = full_transition(make_entry(pv, 0.0, uk_frac, vk_frac), pv, cfg);
  const TransitionReport b = full_transition(make_entry(pd, p.spread_du, uk_frac, vk_frac), pd, cfg);
  ContractionReport c;
  c.log_spread = *a.log_spread;
  c.direct_spread = (flat(a.exit) - flat(b.exit)).norm();
  return c;
}

}  // namespace gfold
