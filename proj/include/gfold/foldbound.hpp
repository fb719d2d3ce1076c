#pragma once

#include "gfold/common.hpp"
#include "gfold/integrate.hpp"

#include <functional>
#include <optional>
#include <string>

namespace gfold {

struct HypothesisError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// eta = (v2)^2 / (4 (pi + pi^2)^2) exp(-pi^4/16 - 2 pi^2 v1), for v1 in (0, pi^2/16), v2 != 0.
double eta_bound(double v1_0, double v2_0);
// mu = (e^{2 pi^2 eta} - 1) eta.
double mu_from_eta(double eta);
// Existence time (pi/2 - atan(xi / sqrt(mu))) / sqrt(mu) of x' = mu + x^2, x(0) = xi.
double fold_blowup_time(double mu, double xi);
// The same time by integration, read off where |x| passes threshold plus the analytic tail 1/|x|.
double fold_blowup_time_numeric(double mu, double xi, const IntegratorConfig& cfg = {}, double threshold = 1e8);

double epsilon_threshold_eta(double eta);                   // eta^2 / (2 sqrt 2)
double epsilon_threshold_sharp(double eta);                 // eta sqrt(mu) / (4 pi)
double epsilon_threshold_initial(double v1_0, double v2_0);  // closed form in the initial data

using ScalarField = std::function<double(double t, double x)>;

struct ComparisonBox {
  double x_lo = -10.0;
  double x_hi = 10.0;
  int nt = 41;
  int nx = 81;
};

struct ComparisonResult {
  bool ordered = false;
  double min_gap = 0.0;         // min of f - g over the sampled box
  double min_difference = 0.0;  // min of y_f - y_g over the sample times
  double horizon = 0.0;         // common existence time actually compared
};

// Throws HypothesisError when sampling finds f <= g.
ComparisonResult comparison_check(const ScalarField& f, const ScalarField& g, double x0, double T,
                                  const IntegratorConfig& cfg = {}, const ComparisonBox& box = {});

struct BlowupConfig {
  double u1_0 = 0.0;
  double u2_0 = -0.3;
  double v1_0 = 0.1;
  double v2_0 = 1.0;
  double eps = 1e-3;
};

struct BlowupVerdict {
  std::optional<double> blowup_time;
  double sign_change_deadline = 0.0;  // v1_0 / eps
  bool before_sign_change = false;
  // summary
  std::string status;
  double final_time = 0.0;
  long steps = 0;
  bool symmetry_applied = false;  // (u2, v2) -> (-u2, -v2) for v2_0 < 0
  bool u1_0_in_reduced_range = false;  // -pi/2 < u1_0 <= pi/4
  bool u2_nonpositive = false;
  double v2_exactness = 0.0;  // max |v2 e^{eps pi^2 t} / v2_0 - 1|
  std::optional<double> eta;
  std::optional<double> eps_threshold;
};

BlowupVerdict verify_blowup_before_sign_change(const BlowupConfig& c, const IntegratorConfig& icfg = {});

}  // namespace gfold
