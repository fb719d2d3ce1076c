#include "gfold/foldbound.hpp"

#include "gfold/vectorfields.hpp"

#include <algorithm>
#include <cmath>

namespace gfold {

namespace {

const double pp = pi + pi * pi;
const double pi2 = pi * pi;
const double pi4 = pi2 * pi2;

void check_initial(double v1_0, double v2_0) {
  if (!(v1_0 > 0) || !(v1_0 < pi2 / 16.0)) throw DomainError("v1_0 must lie in (0, pi^2/16)");
  if (!(v2_0 != 0) || !std::isfinite(v2_0)) throw DomainError("v2_0 must be nonzero");
}

}  // namespace

double eta_bound(double v1_0, double v2_0) {
  check_initial(v1_0, v2_0);
  const double pre = std::exp(-pi4 / 16.0) / (4.0 * pp * pp);
  const double eta = v2_0 * v2_0 / (4.0 * pp * pp) * std::exp(-pi4 / 16.0 - 2.0 * pi2 * v1_0);
  // eta e^{-2 pi^2 eta} < pre (v2)^2 e^{-2 pi^2 v1}, and eta < pi^2/16.
  const double rhs = pre * v2_0 * v2_0 * std::exp(-2.0 * pi2 * v1_0);
  if (!(eta * std::exp(-2.0 * pi2 * eta) < rhs) || !(eta < pi2 / 16.0))
    throw EstimationError("eta_bound: relation between initial values fails");
  return eta;
}

double mu_from_eta(double eta) {
  if (!(eta > 0)) throw DomainError("mu_from_eta: eta must be positive");
  return std::expm1(2.0 * pi2 * eta) * eta;
}

double fold_blowup_time(double mu, double xi) {
  if (!(mu > 0)) throw DomainError("fold_blowup_time: mu must be positive");
  const double s = std::sqrt(mu);
  return (pi / 2.0 - std::atan(xi / s)) / s;
}

double fold_blowup_time_numeric(double mu, double xi, const IntegratorConfig& cfg, double threshold) {
  if (!(mu > 0)) throw DomainError("fold_blowup_time_numeric: mu must be positive");
  if (!(threshold > std::abs(xi))) throw DomainError("fold_blowup_time_numeric: threshold below |xi|");
  IntegratorConfig c = cfg;
  c.blowup_norm = 10.0 * threshold;
  Field f = [mu](double, const VectorXd& y) {
    VectorXd d(1);
    d(0) = rhs_fold_normal(y(0), mu);
    return d;
  };
  VectorXd y0(1);
  y0(0) = xi;
  const double horizon = 10.0 * pi / std::sqrt(mu) + 10.0;
  Trajectory tr = integrate(f, y0, 0.0, horizon, c, {EventSpec::coordinate_equals(0, threshold, "x=X")});
  if (tr.status != Status::event_terminated) throw EstimationError("fold_blowup_time_numeric: no blowup found");
  return tr.final_time() + 1.0 / threshold;
}

double epsilon_threshold_eta(double eta) {
  if (!(eta > 0)) throw DomainError("epsilon_threshold_eta: eta must be positive");
  return eta * eta / (2.0 * sqrt2);
}

double epsilon_threshold_sharp(double eta) { return eta * std::sqrt(mu_from_eta(eta)) / (4.0 * pi); }

double epsilon_threshold_initial(double v1_0, double v2_0) {
  check_initial(v1_0, v2_0);
  const double v4 = v2_0 * v2_0 * v2_0 * v2_0;
  return std::exp(-pi4 / 8.0) / (32.0 * sqrt2 * std::pow(pp, 4)) * std::exp(-4.0 * pi2 * v1_0) * v4;
}

ComparisonResult comparison_check(const ScalarField& f, const ScalarField& g, double x0, double T,
                                  const IntegratorConfig& cfg, const ComparisonBox& box) {
  if (!(T > 0)) throw DomainError("comparison_check: T must be positive");
  if (box.nt < 2 || box.nx < 2 || !(box.x_lo < box.x_hi)) throw ConfigError("comparison_check: bad box");
  ComparisonResult r;
  r.min_gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < box.nt; ++i)
    for (int j = 0; j < box.nx; ++j) {
      const double t = T * i / (box.nt - 1);
      const double x = box.x_lo + (box.x_hi - box.x_lo) * j / (box.nx - 1);
      r.min_gap = std::min(r.min_gap, f(t, x) - g(t, x));
    }
  if (!(r.min_gap > 0))
    throw HypothesisError("comparison_check: f > g fails on the box (min gap " + std::to_string(r.min_gap) + ")");

  auto solve = [&](const ScalarField& h) {
    Field F = [&h](double t, const VectorXd& y) {
      VectorXd d(1);
      d(0) = h(t, y(0));
      return d;
    };
    VectorXd y0(1);
    y0(0) = x0;
    return integrate(F, y0, 0.0, T, cfg);
  };
  const Trajectory yf = solve(f), yg = solve(g);
  r.horizon = std::min(yf.final_time(), yg.final_time());
  r.min_difference = std::numeric_limits<double>::infinity();
  const int n = 200;
  for (int i = 0; i <= n; ++i) {
    const double t = r.horizon * i / n;
    r.min_difference = std::min(r.min_difference, yf.at(t)(0) - yg.at(t)(0));
  }
  r.ordered = r.min_difference >= -10.0 * cfg.abs_tol;
  return r;
}

BlowupVerdict verify_blowup_before_sign_change(const BlowupConfig& c, const IntegratorConfig& icfg) {
  if (!(c.v1_0 > 0)) throw DomainError("verify_blowup_before_sign_change: v1_0 must be positive");
  if (!(c.eps > 0)) throw DomainError("verify_blowup_before_sign_change: eps must be positive");
  BlowupVerdict v;
  double u2 = c.u2_0, v2 = c.v2_0;
  if (v2 < 0) {
    u2 = -u2;
    v2 = -v2;
    v.symmetry_applied = true;
  }
  v.sign_change_deadline = c.v1_0 / c.eps;
  v.u1_0_in_reduced_range = c.u1_0 > -pi / 2.0 && c.u1_0 <= pi / 4.0;
  if (c.v1_0 < pi2 / 16.0 && v2 != 0) {
    v.eta = eta_bound(c.v1_0, v2);
    v.eps_threshold = epsilon_threshold_initial(c.v1_0, v2);
  }

  VectorXd y0(4);
  y0 << c.u1_0, c.v1_0, u2, v2;
  const double eps = c.eps;
  Field f = [eps](double, const VectorXd& y) { return rhs_example2(y, eps); };
  IntegratorConfig cfg = icfg;
  cfg.keep_dense = false;
  Trajectory tr;
  try {
    tr = integrate(f, y0, 0.0, 2.0 * v.sign_change_deadline, cfg,
                   {EventSpec::sign_change(1, "v1=0", Direction::decreasing)});
  } catch (const IntegrationError& e) {
    v.status = std::string("integration_failed: ") + e.what();
    v.final_time = e.t;
    return v;
  }
  v.status = to_string(tr.status);
  v.final_time = tr.final_time();
  v.steps = static_cast<long>(tr.times.size()) - 1;
  v.u2_nonpositive = true;
  for (std::size_t i = 0; i < tr.states.size(); ++i) {
    const VectorXd& y = tr.states[i];
    if (y(2) > 0) v.u2_nonpositive = false;
    if (v2 != 0)
      v.v2_exactness = std::max(v.v2_exactness, std::abs(y(3) * std::exp(eps * pi2 * tr.times[i]) / v2 - 1.0));
  }
  if (tr.status == Status::blowup_detected) {
    double tb = tr.final_time();
    try {
      tb = blowup_time_estimate(tr);
    } catch (const EstimationError&) {
    }
    v.blowup_time = tb;
  }
  v.before_sign_change = v.blowup_time && *v.blowup_time < v.sign_change_deadline;
  return v;
}

}  // namespace gfold
