#pragma once

#include "gfold/charts.hpp"
#include "gfold/integrate.hpp"

#include <vector>

namespace gfold {

// Repository value of Omega_0, agreed by the direct and extrapolated computations.
inline constexpr double omega0_golden = 3.30658321015724;
inline constexpr double omega0_golden_tol = 1e-9;

struct ShootingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Residual |s(u) - model(u)| at the sample points and its log-log decay rate.
struct AsymptoticFit {
  std::vector<double> u;
  std::vector<double> residual;
  double coefficient = 0.0;  // coefficient of 1/u in the model
  double exponent = 0.0;
};

// gamma_2 of u12' = -v12 + 2^{-1/2} u12^2, v12' = -2^{1/2}, as the graph v12 = s(u12).
struct RiccatiOrbit {
  std::vector<double> u;
  std::vector<double> s;
  double omega0 = 0.0;  // Richardson value
  double omega0_direct = 0.0;
  double omega0_richardson = 0.0;
  // u -> -inf: s - 2^{-1/2} u^2 - c/u. nominal c = 2^{-1/2}, corrected c = 1.
  AsymptoticFit left_nominal, left_corrected;
  // u -> +inf: s + Omega_0 - c/u. nominal c = 2^{1/2}, corrected c = 2.
  AsymptoticFit right_nominal, right_corrected;
};

// Series start value at u < 0 with the given 1/u coefficient.
inline double gamma2_left_series(double u, double c = 1.0) { return u * u / sqrt2 + c / u; }

// s(u) at each requested u (ascending, all > u_start).
std::vector<double> gamma2_values(const std::vector<double>& us, double u_start = -50.0, double tol = 1e-13);
double omega0_direct(double u_start = -50.0, double tol = 1e-13);
double omega0_richardson(double u_start = -50.0, double tol = 1e-13);
RiccatiOrbit riccati_gamma2(double u_start = -50.0, double u_end = 80.0, double tol = 1e-13);

// Least-squares slope of -log|r| against log|u|.
double decay_exponent(const std::vector<double>& u, const std::vector<double>& r);

// K2 point of gamma_2 on v12 = delta^{-2/3}, higher modes and r2 zero.
ChartState q0(double delta, int k0, double tol = 1e-13);

}  // namespace gfold
