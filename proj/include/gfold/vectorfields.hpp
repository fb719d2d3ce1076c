#pragma once

#include "gfold/common.hpp"
#include "gfold/spectral.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace gfold {

// Flattened layout used by every downstairs field: [u_1..u_k0, v_1..v_k0].
struct GalerkinState {
  VectorXd u;
  VectorXd v;

  static GalerkinState zero(int k0) { return {VectorXd::Zero(k0), VectorXd::Zero(k0)}; }
  static GalerkinState from_flat(const VectorXd& y);
  VectorXd flat() const;
};

// One term c * prod y_m^{p_m} with y = (u_1..u_k0, v_1..v_k0, eps), added to a single component.
struct Monomial {
  std::string target;  // "u1", "uK" or "vK" with K >= 2
  double coeff = 0.0;
  std::vector<int> powers;
};

class HigherOrderSpec {
 public:
  HigherOrderSpec() = default;
  static HigherOrderSpec polynomial(int k0, std::vector<Monomial> terms);

  bool is_zero() const { return terms_.empty(); }
  int k0() const { return k0_; }
  const std::vector<Monomial>& terms() const { return terms_; }

  // Whether a monomial belongs to the order class of the named component.
  static bool admissible(int k0, const std::string& target, const std::vector<int>& powers);

  // Adds H^u to the u-block and eps*H^v to the v-block of dy.
  template <typename Scalar>
  void add(const Vec<Scalar>& y, const Scalar& eps, Vec<Scalar>& dy) const {
    for (std::size_t n = 0; n < terms_.size(); ++n) {
      const auto& m = terms_[n];
      Scalar val(m.coeff);
      const int nv = static_cast<int>(m.powers.size());
      for (int q = 0; q < nv; ++q) {
        const Scalar& base = (q < 2 * k0_) ? y(q) : eps;
        for (int r = 0; r < m.powers[q]; ++r) val *= base;
      }
      const Index t = target_index_[n];
      if (t >= k0_) val *= eps;
      dy(t) += val;
    }
  }

 private:
  int k0_ = 0;
  std::vector<Monomial> terms_;
  std::vector<Index> target_index_;
};

struct ModelParams {
  Basis basis;
  double eps = 0.0;
  double A = 1.0;  // only read by rhs_prepared
  HigherOrderSpec hot;

  ModelParams(int k0, double a, double eps_ = 0.0) : basis(k0, a), eps(eps_) {}
  int k0() const { return basis.k0(); }
  double a() const { return basis.a(); }
};

namespace detail {

struct CoreCoefficients {
  double square;    // factor on sum u_j^2 in u_1'
  double forcing;   // v_1' = -forcing * eps
  double cross;     // factor on u_1 u_k in u_k'
  double coupling;  // factor on sum eta u_i u_j in u_k'
};

template <typename Derived, typename LinU, typename LinV>
Vec<typename Derived::Scalar> galerkin_core(const Eigen::MatrixBase<Derived>& y,
                                            const typename Derived::Scalar& eps,
                                            const Basis& basis,
                                            const CoreCoefficients& c,
                                            LinU lin_u, LinV lin_v) {
  using Scalar = typename Derived::Scalar;
  const int k0 = basis.k0();
  const auto u = y.head(k0);
  const auto v = y.segment(k0, k0);
  Vec<Scalar> dy(2 * k0);
  Scalar sq(0);
  for (int j = 0; j < k0; ++j) sq += u(j) * u(j);
  dy(0) = -v(0) + c.square * sq;
  dy(k0) = -c.forcing * eps;
  for (int k = 2; k <= k0; ++k) {
    dy(k - 1) = lin_u(k) * u(k - 1) - v(k - 1) + c.cross * u(0) * u(k - 1) +
                c.coupling * basis.quadratic(k, u);
    dy(k0 + k - 1) = lin_v(k) * v(k - 1);
  }
  return dy;
}

}  // namespace detail

// Galerkin truncation in the original variables.
template <typename Derived>
Vec<typename Derived::Scalar> rhs_original(const Eigen::MatrixBase<Derived>& y, const ModelParams& p) {
  using Scalar = typename Derived::Scalar;
  require_shape(y.size(), 2 * p.k0(), "rhs_original");
  const double a = p.a();
  const double s = 1.0 / std::sqrt(2.0 * a);
  const Scalar eps(p.eps);
  detail::CoreCoefficients c{s, std::sqrt(2.0 * a), 2.0 * s, 1.0 / std::sqrt(a)};
  auto dy = detail::galerkin_core(
      y, eps, p.basis, c, [&](int k) { return p.basis.lambda(k); },
      [&](int k) { return p.eps * p.basis.lambda(k); });
  if (!p.hot.is_zero()) p.hot.add<Scalar>(y, eps, dy);
  return dy;
}

// After the substitution (u, v) -> a^{1/2} (u, v).
template <typename Derived>
Vec<typename Derived::Scalar> rhs_rescaled(const Eigen::MatrixBase<Derived>& y, const ModelParams& p) {
  using Scalar = typename Derived::Scalar;
  require_shape(y.size(), 2 * p.k0(), "rhs_rescaled");
  const Scalar eps(p.eps);
  detail::CoreCoefficients c{1.0 / sqrt2, sqrt2, sqrt2, 1.0};
  auto dy = detail::galerkin_core(
      y, eps, p.basis, c, [&](int k) { return p.basis.lambda(k); },
      [&](int k) { return p.eps * p.basis.lambda(k); });
  if (!p.hot.is_zero()) p.hot.add<Scalar>(y, eps, dy);
  return dy;
}

// Slow time tau = eps t: fast components divided by eps.
template <typename Derived>
Vec<typename Derived::Scalar> rhs_slowtime(const Eigen::MatrixBase<Derived>& y, const ModelParams& p) {
  if (!(p.eps > 0)) throw DomainError("rhs_slowtime: eps must be positive");
  auto dy = rhs_rescaled(y, p);
  dy.head(p.k0()) /= p.eps;
  return dy;
}

// eps promoted to the last state coordinate; a = A eps^{-1/6}.
template <typename Derived>
Vec<typename Derived::Scalar> rhs_prepared(const Eigen::MatrixBase<Derived>& y, const ModelParams& p) {
  using std::cbrt;
  using Scalar = typename Derived::Scalar;
  const int k0 = p.k0();
  require_shape(y.size(), 2 * k0 + 1, "rhs_prepared");
  const Scalar eps = y(2 * k0);
  if (eps < Scalar(0)) throw DomainError("rhs_prepared: eps must be nonnegative");
  const Scalar e13 = cbrt(eps);
  const double inv4A2 = 1.0 / (4.0 * p.A * p.A);
  detail::CoreCoefficients c{1.0 / sqrt2, sqrt2, sqrt2, 1.0};
  Vec<Scalar> head = y.head(2 * k0);
  auto core = detail::galerkin_core(
      head, eps, p.basis, c, [&](int k) { return p.basis.b(k) * inv4A2 * e13; },
      [&](int k) { return p.basis.b(k) * inv4A2 * e13 * eps; });
  if (!p.hot.is_zero()) p.hot.add<Scalar>(head, eps, core);
  Vec<Scalar> dy(2 * k0 + 1);
  dy.head(2 * k0) = core;
  dy(2 * k0) = Scalar(0);
  return dy;
}

// Two-mode example in its own scaling, ordered (u1, v1, u2, v2).
template <typename Derived>
Vec<typename Derived::Scalar> rhs_example2(const Eigen::MatrixBase<Derived>& y, double eps) {
  using Scalar = typename Derived::Scalar;
  require_shape(y.size(), 4, "rhs_example2");
  Vec<Scalar> dy(4);
  dy(0) = -y(1) + y(0) * y(0) + y(2) * y(2);
  dy(1) = Scalar(-eps);
  dy(2) = -y(3) + y(2) * (2.0 * y(0) - pi * pi);
  dy(3) = -eps * pi * pi * y(3);
  return dy;
}

inline double rhs_fold_normal(double x, double mu) { return mu + x * x; }

}  // namespace gfold
