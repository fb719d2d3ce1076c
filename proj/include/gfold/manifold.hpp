#pragma once

#include "gfold/common.hpp"
#include "gfold/integrate.hpp"
#include "gfold/spectral.hpp"

#include <complex>
#include <string>
#include <vector>

namespace gfold {

enum class StabilityKind { attracting, saddle, nonhyperbolic };

struct Classification {
  StabilityKind kind = StabilityKind::nonhyperbolic;
  int unstable = 0;  // m in saddle(m)
  double max_real = 0.0;
  std::vector<std::complex<double>> eigenvalues;

  std::string label() const;
};

struct CriticalPoint {
  VectorXd u;
  VectorXd v;
  Classification cls;
};

// v = (f_1(u), .., f_k0(u)): zero set of the fast field of the rescaled system at eps = 0.
VectorXd critical_graph(const VectorXd& u, const Basis& basis);
MatrixXd layer_jacobian(const VectorXd& u, const Basis& basis);
double max_real_eigenvalue(const VectorXd& u, const Basis& basis);
Classification classify(const VectorXd& u, const Basis& basis, double tol = 1e-10);
CriticalPoint critical_point(const VectorXd& u, const Basis& basis, double tol = 1e-10);

// Root in [lo, hi] of the largest layer eigenvalue along mode free_mode (1-based), the
// other coordinates of u held fixed.
double fold_boundary(const VectorXd& u, int free_mode, const Basis& basis, double lo, double hi);
// Same root for free_mode = 1, bracket [-L, 0] with L grown until it brackets.
double fold_boundary_u1(const VectorXd& u, const Basis& basis);
// The nominal closed form for k0 = 2, kept only for comparison.
double g_nominal(double u2);

struct SlowImageCurve {
  std::vector<double> u1, u2, v1, v2;
  Eigen::Vector3d quad;  // v1 ~ quad(0) + quad(1) v2 + quad(2) v2^2
  double fit_residual = 0.0;
};

// k0 = 2: image of the fold curve under (f_1, f_2), sampled at n values u2 in [-u2_max, u2_max].
SlowImageCurve slow_image_of_boundary(const Basis& basis, double u2_max = 0.1, int n = 41);
// h(v2): the v1-height of the fold image above v2.
double fold_image_height(double v2, const Basis& basis);

struct EntryRegionSpec {
  double rho = 0.5;
  double C_in_u1 = 0.05;
  double C_in_uk = 0.05;
  double C_in_vk = 0.05;
  double C = 0.1;
  double C_in_v2 = 0.05;
  int k0 = 2;
};

double entry_s(double v1, const EntryRegionSpec& spec);
bool entry_predicate(double v1, double v2, const EntryRegionSpec& spec, const Basis& basis);

struct RelaxationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SlowBox {
  double v1_lo = 0.04 / sqrt2;
  double v1_hi = 1.0 / sqrt2;
  double v2_lo = -0.1;
  double v2_hi = 0.1;
  int n1 = 4;
  int n2 = 3;
};

struct ConvergenceOptions {
  double a = 2.0;
  double eps_relax = 1e-4;
  double relax_time = 150.0;
  double agree_tol = 1e-8;  // two seeds must land this close
  SlowBox box;
  IntegratorConfig cfg{1e-12, 1e-13};
};

struct ConvergenceReport {
  std::vector<int> k0;
  std::vector<double> distance;
  double exponent_fit = 0.0;
  bool monotone = false;
  int k_ref = 0;
};

// Fast coordinates of the attracting slow manifold above v, by forward relaxation.
VectorXd relax_slow_graph(const VectorXd& v, int k0, const ConvergenceOptions& opt);
ConvergenceReport galerkin_convergence_check(const std::vector<int>& k0_list, int k_ref,
                                             const ConvergenceOptions& opt = {});

}  // namespace gfold
