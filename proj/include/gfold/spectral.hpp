#pragma once

#include "gfold/common.hpp"

#include <vector>

namespace gfold {

// Neumann cosine basis on (-a, a). Mode indices are 1-based.
double eigenvalue(int k, double a);
double b_coefficient(int k);
double eta_coefficient(int k, int i, int j);

struct Coupling {
  int i;
  int j;
  double eta;
};

struct EtaRow {
  int k;
  int i;
  int j;
  double eta;
};

// Every triple 2 <= k, i, j <= k0 in (k, i, j) lexicographic order, zeros included.
std::vector<EtaRow> coupling_table(int k0);

class Basis {
 public:
  Basis(int k0, double a);

  int k0() const { return k0_; }
  double a() const { return a_; }
  double lambda(int k) const { return lambda_.at(k - 1); }
  double b(int k) const { return b_coefficient(k); }
  double eval(int k, double x) const;

  // Nonzero entries of eta^k_{ij}, i, j in [2, k0].
  const std::vector<Coupling>& couplings(int k) const { return couplings_.at(k - 1); }

  // sum_{i,j>=2} eta^k_{ij} u_i u_j with u indexed from 0 (u(0) = u_1).
  template <typename Derived>
  typename Derived::Scalar quadratic(int k, const Eigen::MatrixBase<Derived>& u) const {
    typename Derived::Scalar s(0);
    for (const auto& c : couplings(k)) s += c.eta * u(c.i - 1) * u(c.j - 1);
    return s;
  }

 private:
  int k0_;
  double a_;
  std::vector<double> lambda_;
  std::vector<std::vector<Coupling>> couplings_;
};

// samples: values on the uniform grid x_n = -a + n h, n = 0..N, h = 2a/N.
VectorXd project(const VectorXd& samples, const Basis& basis);
double reconstruct(const VectorXd& coeffs, double x, const Basis& basis);

// Composite Simpson on uniform samples; the 3/8 rule closes an odd panel count.
double simpson(const VectorXd& samples, double h);

}  // namespace gfold
