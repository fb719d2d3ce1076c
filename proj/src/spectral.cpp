#include "gfold/spectral.hpp"

#include <cmath>
#include <cstdlib>

namespace gfold {

double eigenvalue(int k, double a) {
  if (k < 1) throw DomainError("eigenvalue: k must be >= 1");
  if (!(a > 0)) throw DomainError("eigenvalue: a must be positive");
  return b_coefficient(k) / (4.0 * a * a);
}

double b_coefficient(int k) {
  if (k < 1) throw DomainError("b_coefficient: k must be >= 1");
  const double m = k - 1;
  return k == 1 ? 0.0 : -m * m * pi * pi;
}

double eta_coefficient(int k, int i, int j) {
  if (k < 2 || i < 2 || j < 2)
    throw DomainError("eta_coefficient: indices must be >= 2");
  double s = 0.0;
  if (i + j - 2 == k - 1) s += 0.5;
  if (std::abs(i - j) == k - 1) s += 0.5;
  return s;
}

std::vector<EtaRow> coupling_table(int k0) {
  std::vector<EtaRow> rows;
  for (int k = 2; k <= k0; ++k)
    for (int i = 2; i <= k0; ++i)
      for (int j = 2; j <= k0; ++j) rows.push_back({k, i, j, eta_coefficient(k, i, j)});
  return rows;
}

Basis::Basis(int k0, double a) : k0_(k0), a_(a) {
  if (k0 < 1) throw DomainError("Basis: k0 must be >= 1");
  if (!(a > 0)) throw DomainError("Basis: a must be positive");
  lambda_.resize(k0);
  couplings_.resize(k0);
  for (int k = 1; k <= k0; ++k) {
    lambda_[k - 1] = eigenvalue(k, a);
    if (k < 2) continue;
    for (int i = 2; i <= k0; ++i)
      for (int j = 2; j <= k0; ++j) {
        const double e = eta_coefficient(k, i, j);
        if (e != 0.0) couplings_[k - 1].push_back({i, j, e});
      }
  }
}

double Basis::eval(int k, double x) const {
  if (k < 1) throw DomainError("Basis::eval: k must be >= 1");
  if (k == 1) return 1.0 / std::sqrt(2.0 * a_);
  return std::cos((k - 1) * pi * (x + a_) / (2.0 * a_)) / std::sqrt(a_);
}

double simpson(const VectorXd& f, double h) {
  const Index n = f.size() - 1;
  if (n < 2) throw ResolutionError("simpson: need at least two panels");
  Index even = (n % 2 == 0) ? n : n - 3;
  double s = 0.0;
  if (even > 0) {
    s = f(0) + f(even);
    for (Index m = 1; m < even; ++m) s += (m % 2 ? 4.0 : 2.0) * f(m);
    s *= h / 3.0;
  }
  if (even != n) s += 3.0 * h / 8.0 * (f(n - 3) + 3.0 * f(n - 2) + 3.0 * f(n - 1) + f(n));
  return s;
}

VectorXd project(const VectorXd& samples, const Basis& basis) {
  const Index n = samples.size() - 1;
  if (samples.size() < 4 * basis.k0() || n < 2)
    throw ResolutionError("project: grid needs at least 4*k0 points");
  const double a = basis.a();
  const double h = 2.0 * a / static_cast<double>(n);
  VectorXd coeffs(basis.k0());
  VectorXd w(n + 1);
  for (int k = 1; k <= basis.k0(); ++k) {
    for (Index m = 0; m <= n; ++m) w(m) = samples(m) * basis.eval(k, -a + m * h);
    coeffs(k - 1) = simpson(w, h);
  }
  return coeffs;
}

double reconstruct(const VectorXd& coeffs, double x, const Basis& basis) {
  if (x < -basis.a() || x > basis.a()) throw DomainError("reconstruct: x outside (-a, a)");
  if (coeffs.size() > basis.k0()) throw ShapeError("reconstruct: more coefficients than modes");
  double s = 0.0;
  for (Index k = 0; k < coeffs.size(); ++k) s += coeffs(k) * basis.eval(static_cast<int>(k) + 1, x);
  return s;
}

}  // namespace gfold
