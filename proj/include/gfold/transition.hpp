#pragma once

#include "gfold/charts.hpp"
#include "gfold/integrate.hpp"

#include <optional>
#include <string>
#include <vector>

namespace gfold {

struct TransitionError : std::runtime_error {
  TransitionError(const std::string& stage, const std::string& what, VectorXd last = {})
      : std::runtime_error(stage + ": " + what), stage(stage), last_state(std::move(last)) {}
  std::string stage;
  VectorXd last_state;
};

// One chart passage. traj is in the chart's smooth coordinates (mu in place of eps for K1 / K3).
struct StageResult {
  ChartState exit;
  double time = 0.0;
  Trajectory traj;
};

// K1 from r1 = rho to eps1 = delta.
StageResult pi1(const ChartState& entry, const ChartParams& p, double delta, const IntegratorConfig& cfg);
// K2 to u12 = delta^{-1/3}, or to u_exit when given.
StageResult pi2(const ChartState& entry, const ChartParams& p, double delta, const IntegratorConfig& cfg,
                std::optional<double> u_exit = std::nullopt);
// K3 from eps3 = delta to r3 = rho, in the F3-rescaled time (r3 = r3_in e^t).
StageResult pi3(const ChartState& entry, const ChartParams& p, double rho, const IntegratorConfig& cfg);

struct TransitionParams {
  int k0 = 3;
  double a = 0.5;
  double eps = 1e-4;
  double rho = 0.5;
  double delta = 5e-3;
  double C_in_u1 = 0.05;
  double C_in_uk = 0.05;
  double C_in_vk = 0.05;
  double C_out = 0.05;
  double sigma = 1.0;  // sigma, sigma_u, sigma_v of the chart estimates
  double exit_constant = 10.0;
  bool variational = true;  // track the exit spread of a u1 perturbation
  double spread_du = 1e-3;

  void validate() const;
};

// Point of R^in: u1 = -2^{1/4} rho + du1, v1 = rho^2, u_k = uk_frac C_in_uk, v_k = vk_frac C_in_vk eps^{4/3}.
Downstairs make_entry(const TransitionParams& p, double du1 = 0.0, double uk_frac = 0.0, double vk_frac = 0.0);
bool in_entry_region(const Downstairs& d, const TransitionParams& p);

struct StageRecord {
  std::string label;
  Chart chart = Chart::K1;
  double time = 0.0;
  VectorXd entry;  // chart coordinates
  VectorXd exit;
  double eps_entry = 0.0;  // blown-down eps at the stage ends
  double eps_exit = 0.0;
};

struct TransitionReport {
  Downstairs entry;
  Downstairs exit;
  double time = 0.0;  // summed desingularised chart times
  std::vector<Chart> path;
  std::vector<StageRecord> stages;
  std::vector<BoundItem> bounds;
  bool bounds_pass = false;
  double eps_drift = 0.0;  // max relative deviation of blown-down eps over stage ends
  double exit_residual = 0.0;  // |u1_out - rho|
  double v1_out = 0.0;
  // K2 exit value of v12 versus -Omega_0 + 2^{1/2} delta^{1/3}.
  std::optional<double> v12_exit, v12_predicted;
  // K3 exit eps3: observed, exact delta (r3_in/rho)^3, and the nominal delta^{1/3} r3_in/rho.
  std::optional<double> eps3_exit, eps3_exit_exact, eps3_exit_nominal;
  // log of the exit displacement (on u1 = rho) of an entry shifted by spread_du in u1.
  std::optional<double> log_spread;
};

TransitionReport full_transition(const Downstairs& entry, const TransitionParams& p, const IntegratorConfig& cfg);

struct ContractionReport {
  double log_spread = 0.0;       // variational
  double direct_spread = 0.0;    // |exit(a) - exit(b)| for entries du apart
};

ContractionReport contraction(const TransitionParams& p, const IntegratorConfig& cfg, double uk_frac = 0.0,
                              double vk_frac = 0.0);

}  // namespace gfold
