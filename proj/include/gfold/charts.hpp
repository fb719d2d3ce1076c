#pragma once

#include "gfold/common.hpp"
#include "gfold/integrate.hpp"
#include "gfold/spectral.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace gfold {

// Coordinate layouts (m = k0 - 1 higher modes):
//   K1: [u11, r1, u_{k,1} (m), v_{k,1} (m), eps1]
//   K2: [u12, v12, u_{k,2} (m), v_{k,2} (m), r2]
//   K3: [r3, v13, u_{k,3} (m), v_{k,3} (m), eps3]
// The smooth forms used for integration replace eps1 / eps3 by mu = eps^{1/3}.
enum class Chart { K1, K2, K3 };

const char* to_string(Chart c);
Chart chart_from_string(const std::string& s);

struct ChartDomainError : std::domain_error {
  using std::domain_error::domain_error;
};

struct SingularRescaleError : std::domain_error {
  using std::domain_error::domain_error;
};

struct OrderingError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ChartState {
  Chart chart = Chart::K1;
  VectorXd coords;

  int k0() const { return static_cast<int>(coords.size() - 1) / 2; }
};

struct Downstairs {
  VectorXd u;
  VectorXd v;
  double eps = 0.0;
};

std::vector<std::string> chart_names(Chart c, int k0);

Downstairs blowdown(const ChartState& s);
ChartState lift_to_chart(const VectorXd& u, const VectorXd& v, double eps, Chart c);

ChartState kappa12(const ChartState& s);
ChartState kappa21(const ChartState& s);
ChartState kappa23(const ChartState& s);
ChartState kappa32(const ChartState& s);

// eps <-> eps^{1/3} in the last slot of K1 / K3; identity on K2.
VectorXd to_smooth(const ChartState& s);
ChartState from_smooth(Chart c, const VectorXd& y);

// b_k / (4 A^2) with A = a eps^{1/6}; eta from the cosine basis.
struct ChartParams {
  Basis basis;
  double A = 1.0;

  ChartParams(int k0, double A_) : basis(k0, 1.0), A(A_) {}
  static ChartParams from_domain(int k0, double a, double eps) {
    return ChartParams(k0, a * std::pow(eps, 1.0 / 6.0));
  }
  int k0() const { return basis.k0(); }
  double c(int k) const { return basis.b(k) / (4.0 * A * A); }
};

namespace detail {

inline double scalar_value(double x) { return x; }
template <typename T>
double scalar_value(const T& x) {
  return x.value();
}

template <typename Scalar>
Scalar cube_root(const Scalar& x) {
  using std::pow;
  if (scalar_value(x) == 0.0) return Scalar(0) * x;
  return pow(x, 1.0 / 3.0);
}

template <typename Derived>
typename Derived::Scalar sum_sq(const Eigen::MatrixBase<Derived>& u, Index off, int m) {
  typename Derived::Scalar s(0);
  for (int j = 0; j < m; ++j) s += u(off + j) * u(off + j);
  return s;
}

// sum eta^k_{ij} x_i x_j where x_i lives at y(off + i - 2).
template <typename Derived>
typename Derived::Scalar chart_quadratic(const Basis& b, int k, const Eigen::MatrixBase<Derived>& y,
                                         Index off) {
  typename Derived::Scalar s(0);
  for (const auto& c : b.couplings(k)) s += c.eta * y(off + c.i - 2) * y(off + c.j - 2);
  return s;
}

template <typename Derived>
Vec<typename Derived::Scalar> k1_field(const Eigen::MatrixBase<Derived>& y, const ChartParams& p,
                                       bool smooth) {
  using Scalar = typename Derived::Scalar;
  const int k0 = p.k0(), m = k0 - 1;
  require_shape(y.size(), 2 * k0 + 1, "rhs_K1");
  const Scalar u11 = y(0), r1 = y(1), last = y(2 * k0);
  const Scalar eps1 = smooth ? Scalar(last * last * last) : last;
  const Scalar mu = smooth ? last : cube_root(last);
  const Scalar F1 = eps1 / sqrt2;
  Vec<Scalar> dy(2 * k0 + 1);
  dy(0) = F1 * u11 - 1.0 + (u11 * u11 + sum_sq(y, 2, m)) / sqrt2;
  dy(1) = -r1 * F1;
  const Scalar r13 = r1 * r1 * r1;
  for (int k = 2; k <= k0; ++k) {
    const Scalar uk = y(k), vk = y(m + k);
    dy(k) = F1 * uk + p.c(k) * mu * uk - vk + sqrt2 * u11 * uk + chart_quadratic(p.basis, k, y, 2);
    dy(m + k) = 2.0 * F1 * vk + p.c(k) * r13 * (mu * eps1) * vk;
  }
  dy(2 * k0) = smooth ? Scalar(F1 * last) : Scalar(3.0 * F1 * last);
  return dy;
}

template <typename Derived>
Vec<typename Derived::Scalar> k3_field(const Eigen::MatrixBase<Derived>& y, const ChartParams& p,
                                       bool smooth) {
  using Scalar = typename Derived::Scalar;
  const int k0 = p.k0(), m = k0 - 1;
  require_shape(y.size(), 2 * k0 + 1, "rhs_K3");
  const Scalar r3 = y(0), v13 = y(1), last = y(2 * k0);
  const Scalar eps3 = smooth ? Scalar(last * last * last) : last;
  const Scalar mu = smooth ? last : cube_root(last);
  const Scalar F3 = -v13 + 1.0 / sqrt2 + sum_sq(y, 2, m) / sqrt2;
  Vec<Scalar> dy(2 * k0 + 1);
  dy(0) = r3 * F3;
  dy(1) = -2.0 * F3 * v13 - sqrt2 * eps3;
  const Scalar r33 = r3 * r3 * r3;
  for (int k = 2; k <= k0; ++k) {
    const Scalar uk = y(k), vk = y(m + k);
    dy(k) = (-F3 + p.c(k) * mu + sqrt2) * uk - vk + chart_quadratic(p.basis, k, y, 2);
    dy(m + k) = (-2.0 * F3 + p.c(k) * r33 * (mu * eps3)) * vk;
  }
  dy(2 * k0) = smooth ? Scalar(-F3 * last) : Scalar(-3.0 * F3 * last);
  return dy;
}

}  // namespace detail

template <typename Derived>
Vec<typename Derived::Scalar> rhs_K1(const Eigen::MatrixBase<Derived>& y, const ChartParams& p) {
  return detail::k1_field(y, p, false);
}

// Last coordinate is mu1 = eps1^{1/3}.
template <typename Derived>
Vec<typename Derived::Scalar> rhs_K1_smooth(const Eigen::MatrixBase<Derived>& y, const ChartParams& p) {
  return detail::k1_field(y, p, true);
}

template <typename Derived>
Vec<typename Derived::Scalar> rhs_K2(const Eigen::MatrixBase<Derived>& y, const ChartParams& p) {
  using Scalar = typename Derived::Scalar;
  const int k0 = p.k0(), m = k0 - 1;
  require_shape(y.size(), 2 * k0 + 1, "rhs_K2");
  const Scalar u12 = y(0), v12 = y(1), r2 = y(2 * k0);
  Vec<Scalar> dy(2 * k0 + 1);
  dy(0) = -v12 + (u12 * u12 + detail::sum_sq(y, 2, m)) / sqrt2;
  dy(1) = Scalar(-sqrt2);
  const Scalar r23 = r2 * r2 * r2;
  for (int k = 2; k <= k0; ++k) {
    const Scalar uk = y(k), vk = y(m + k);
    dy(k) = p.c(k) * uk - vk + sqrt2 * u12 * uk + detail::chart_quadratic(p.basis, k, y, 2);
    dy(m + k) = p.c(k) * r23 * vk;
  }
  dy(2 * k0) = Scalar(0);
  return dy;
}

template <typename Derived>
Vec<typename Derived::Scalar> rhs_K3(const Eigen::MatrixBase<Derived>& y, const ChartParams& p) {
  return detail::k3_field(y, p, false);
}

// Last coordinate is mu3 = eps3^{1/3}.
template <typename Derived>
Vec<typename Derived::Scalar> rhs_K3_smooth(const Eigen::MatrixBase<Derived>& y, const ChartParams& p) {
  return detail::k3_field(y, p, true);
}

template <typename Derived>
typename Derived::Scalar k3_F3(const Eigen::MatrixBase<Derived>& y, int k0) {
  return -y(1) + 1.0 / sqrt2 + detail::sum_sq(y, 2, k0 - 1) / sqrt2;
}

// Smooth K3 field divided by F3.
template <typename Derived>
Vec<typename Derived::Scalar> rhs_K3_time_rescaled(const Eigen::MatrixBase<Derived>& y,
                                                   const ChartParams& p) {
  using std::abs;
  const auto F3 = k3_F3(y, p.k0());
  if (std::abs(detail::scalar_value(F3)) < 1e-6)
    throw SingularRescaleError("rhs_K3_time_rescaled: F3 too close to zero");
  auto dy = rhs_K3_smooth(y, p);
  return dy / F3;
}

// Smooth-coordinate chart changes, templated so they can be differentiated.
template <typename Derived>
Vec<typename Derived::Scalar> kappa12_smooth(const Eigen::MatrixBase<Derived>& y, int k0) {
  using Scalar = typename Derived::Scalar;
  const int m = k0 - 1;
  const Scalar mu = y(2 * k0);
  Vec<Scalar> z(2 * k0 + 1);
  z(0) = y(0) / mu;
  z(1) = 1.0 / (mu * mu);
  for (int j = 0; j < m; ++j) {
    z(2 + j) = y(2 + j) / mu;
    z(2 + m + j) = y(2 + m + j) / (mu * mu);
  }
  z(2 * k0) = mu * y(1);
  return z;
}

template <typename Derived>
Vec<typename Derived::Scalar> kappa23_smooth(const Eigen::MatrixBase<Derived>& y, int k0) {
  using Scalar = typename Derived::Scalar;
  const int m = k0 - 1;
  const Scalar u = y(0);
  Vec<Scalar> z(2 * k0 + 1);
  z(0) = u * y(2 * k0);
  z(1) = y(1) / (u * u);
  for (int j = 0; j < m; ++j) {
    z(2 + j) = y(2 + j) / u;
    z(2 + m + j) = y(2 + m + j) / (u * u);
  }
  z(2 * k0) = 1.0 / u;
  return z;
}

// Smooth K3 coordinates to downstairs (u, v) (eps is a constant of motion and omitted).
template <typename Derived>
Vec<typename Derived::Scalar> blowdown_K3_smooth(const Eigen::MatrixBase<Derived>& y, int k0) {
  using Scalar = typename Derived::Scalar;
  const int m = k0 - 1;
  const Scalar r = y(0);
  Vec<Scalar> z(2 * k0);
  z(0) = r;
  z(k0) = r * r * y(1);
  for (int j = 0; j < m; ++j) {
    z(1 + j) = r * y(2 + j);
    z(k0 + 1 + j) = r * r * y(2 + m + j);
  }
  return z;
}

struct K1ClosedForm {
  double eps1_0, rho, delta, T1;
  double eps1(double t) const;
  double r1(double t) const;
};
K1ClosedForm k1_closed_forms(double eps1_0, double rho, double delta);

struct K3ClosedForm {
  double r3_in, delta, rho, T3;
  double r3(double t) const { return r3_in * std::exp(t); }
  double eps3(double t) const { return delta * std::exp(-3.0 * t); }
  // The nominal exit value delta^{1/3} r3_in / rho, which is mu3 at exit.
  double eps3_exit_nominal() const { return std::cbrt(delta) * r3_in / rho; }
};
K3ClosedForm k3_closed_forms(double r3_in, double delta, double rho);

struct StabilityWindow {
  bool ok = false;
  double lower = 0.0;  // 8^3 a^6 eps0 / pi^6
  double upper = 0.0;  // eps0 / rho^3
  double margin_lower = 0.0;  // delta - lower
  double margin_upper = 0.0;  // upper - delta
};
StabilityWindow k2_stability_window(double delta, double eps0, double rho, double a);

struct BoundItem {
  std::string name;
  double bound = 0.0;
  double observed = 0.0;
  bool pass = false;
};

struct BoundConstants {
  double a = 0.5;  // downstairs half-length
  double rho = 0.5;
  double delta = 5e-3;
  std::optional<double> sigma;    // K2
  std::optional<double> sigma_u;  // K1
  std::optional<double> sigma_v;  // K1
};

struct BoundReport {
  std::vector<BoundItem> items;  // worst case per mode and channel
  double max_ratio = 0.0;
  bool pass = false;
};

// traj in the chart's integration coordinates (smooth for K1 and K3).
BoundReport verify_chart_bounds(const Trajectory& traj, Chart chart, int k0, const BoundConstants& c);

}  // namespace gfold
