#include "gfold/manifold.hpp"

#include "gfold/vectorfields.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gfold {

std::string Classification::label() const {
  switch (kind) {
    case StabilityKind::attracting:
      return "attracting";
    case StabilityKind::saddle:
      return "saddle(" + std::to_string(unstable) + ")";
    case StabilityKind::nonhyperbolic:
      return "nonhyperbolic";
  }
  return "?";
}

VectorXd critical_graph(const VectorXd& u, const Basis& basis) {
  const int k0 = basis.k0();
  require_shape(u.size(), k0, "critical_graph");
  ModelParams p(k0, basis.a(), 0.0);
  VectorXd y(2 * k0);
  y << u, VectorXd::Zero(k0);
  return rhs_rescaled(y, p).head(k0);
}

MatrixXd layer_jacobian(const VectorXd& u, const Basis& basis) {
  const int k0 = basis.k0();
  require_shape(u.size(), k0, "layer_jacobian");
  MatrixXd J = MatrixXd::Zero(k0, k0);
  J(0, 0) = sqrt2 * u(0);
  for (int k = 2; k <= k0; ++k) {
    J(0, k - 1) = sqrt2 * u(k - 1);
    J(k - 1, 0) = sqrt2 * u(k - 1);
    J(k - 1, k - 1) += basis.lambda(k) + sqrt2 * u(0);
    for (const auto& c : basis.couplings(k)) J(k - 1, c.j - 1) += 2.0 * c.eta * u(c.i - 1);
  }
  return J;
}

double max_real_eigenvalue(const VectorXd& u, const Basis& basis) {
  const MatrixXd J = layer_jacobian(u, basis);
  Eigen::EigenSolver<MatrixXd> es(J, false);
  return es.eigenvalues().real().maxCoeff();
}

Classification classify(const VectorXd& u, const Basis& basis, double tol) {
  const MatrixXd J = layer_jacobian(u, basis);
  Eigen::EigenSolver<MatrixXd> es(J, false);
  Classification c;
  const auto ev = es.eigenvalues();
  c.eigenvalues.assign(ev.data(), ev.data() + ev.size());
  std::sort(c.eigenvalues.begin(), c.eigenvalues.end(),
            [](auto a, auto b) { return a.real() > b.real(); });
  c.max_real = c.eigenvalues.front().real();
  bool centre = false;
  for (const auto& z : c.eigenvalues) {
    if (z.real() > tol) ++c.unstable;
    if (std::abs(z.real()) <= tol) centre = true;
  }
  if (centre)
    c.kind = StabilityKind::nonhyperbolic;
  else if (c.unstable > 0)
    c.kind = StabilityKind::saddle;
  else
    c.kind = StabilityKind::attracting;
  return c;
}

CriticalPoint critical_point(const VectorXd& u, const Basis& basis, double tol) {
  return {u, critical_graph(u, basis), classify(u, basis, tol)};
}

namespace {

template <typename F>
double bisect(F f, double lo, double hi, double flo, double fhi) {
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double m = 0.5 * (lo + hi);
    if (m <= lo || m >= hi) break;
    const double fm = f(m);
    if (fm == 0.0) return m;
    if ((fm < 0) == (flo < 0)) {
      lo = m;
      flo = fm;
    } else {
      hi = m;
      fhi = fm;
    }
  }
  return std::abs(flo) < std::abs(fhi) ? lo : hi;
}

}  // namespace

double fold_boundary(const VectorXd& u, int free_mode, const Basis& basis, double lo, double hi) {
  require_shape(u.size(), basis.k0(), "fold_boundary");
  if (free_mode < 1 || free_mode > basis.k0()) throw DomainError("fold_boundary: free mode out of range");
  VectorXd w = u;
  auto f = [&](double s) {
    w(free_mode - 1) = s;
    return max_real_eigenvalue(w, basis);
  };
  const double flo = f(lo), fhi = f(hi);
  if ((flo < 0) == (fhi < 0) && flo != 0.0 && fhi != 0.0)
    throw BracketError("fold_boundary: largest eigenvalue does not change sign in bracket");
  return bisect(f, lo, hi, flo, fhi);
}

double fold_boundary_u1(const VectorXd& u, const Basis& basis) {
  VectorXd w = u;
  double L = 1.0;
  for (int it = 0; it < 60; ++it, L *= 2.0) {
    w(0) = -L;
    if (max_real_eigenvalue(w, basis) < 0) return fold_boundary(u, 1, basis, -L, 0.0);
  }
  throw BracketError("fold_boundary_u1: no attracting point found");
}

double g_nominal(double u2) { return 0.5 * (pi * pi - std::sqrt(pi * pi + 4.0 * u2 * u2)); }

SlowImageCurve slow_image_of_boundary(const Basis& basis, double u2_max, int n) {
  if (basis.k0() != 2) throw DomainError("slow_image_of_boundary: k0 must be 2");
  if (n < 3) throw ResolutionError("slow_image_of_boundary: need at least 3 samples");
  SlowImageCurve c;
  for (int m = 0; m < n; ++m) {
    const double u2 = -u2_max + 2.0 * u2_max * m / (n - 1);
    VectorXd u(2);
    u << 0.0, u2;
    u(0) = fold_boundary_u1(u, basis);
    const VectorXd v = critical_graph(u, basis);
    c.u1.push_back(u(0));
    c.u2.push_back(u2);
    c.v1.push_back(v(0));
    c.v2.push_back(v(1));
  }
  MatrixXd X(n, 3);
  VectorXd b(n);
  for (int m = 0; m < n; ++m) {
    X(m, 0) = 1.0;
    X(m, 1) = c.v2[m];
    X(m, 2) = c.v2[m] * c.v2[m];
    b(m) = c.v1[m];
  }
  c.quad = X.colPivHouseholderQr().solve(b);
  c.fit_residual = (X * c.quad - b).lpNorm<Eigen::Infinity>();
  return c;
}

double fold_image_height(double v2, const Basis& basis) {
  if (basis.k0() != 2) throw DomainError("fold_image_height: k0 must be 2");
  // f_2 is odd and decreasing in u2 along the fold curve; solve on u2 <= 0 for |v2|.
  const double target = std::abs(v2);
  auto point = [&](double u2) {
    VectorXd u(2);
    u << 0.0, u2;
    u(0) = fold_boundary_u1(u, basis);
    return u;
  };
  auto g = [&](double u2) { return critical_graph(point(u2), basis)(1) - target; };
  if (target == 0.0) return critical_graph(point(0.0), basis)(0);
  double U = 0.01;
  while (g(-U) < 0) {
    U *= 2.0;
    if (U > 1e6) throw BracketError("fold_image_height: v2 out of reach");
  }
  const double u2 = bisect(g, -U, 0.0, g(-U), g(0.0));
  return critical_graph(point(u2), basis)(0);
}

double entry_s(double v1, const EntryRegionSpec& spec) {
  return spec.C_in_v2 * std::exp(pi * pi / sqrt2 * (v1 - spec.rho * spec.rho));
}

bool entry_predicate(double v1, double v2, const EntryRegionSpec& spec, const Basis& basis) {
  if (std::abs(v2) > entry_s(v1, spec)) return false;
  return v1 > fold_image_height(v2, basis);
}

VectorXd relax_slow_graph(const VectorXd& v, int k0, const ConvergenceOptions& opt) {
  require_shape(v.size(), k0, "relax_slow_graph");
  ModelParams p(k0, opt.a, opt.eps_relax);
  const double T = opt.relax_time;
  // Start the slow variables where the exact v-flow puts them back on v at time T.
  VectorXd v0(k0);
  v0(0) = v(0) + sqrt2 * opt.eps_relax * T;
  for (int k = 2; k <= k0; ++k) v0(k - 1) = v(k - 1) * std::exp(-opt.eps_relax * p.basis.lambda(k) * T);
  Field f = [&](double, const VectorXd& y) { return rhs_rescaled(y, p); };
  auto run = [&](double scale, double shift) {
    VectorXd y = VectorXd::Zero(2 * k0);
    y(0) = -scale * std::sqrt(sqrt2 * v0(0));
    for (int k = 2; k <= k0; ++k) y(k - 1) = shift;
    y.tail(k0) = v0;
    Trajectory tr = integrate(f, y, 0.0, T, opt.cfg);
    if (tr.status != Status::completed) throw RelaxationError("relax_slow_graph: relaxation did not complete");
    return VectorXd(tr.final_state().head(k0));
  };
  const VectorXd a = run(1.0, 0.0);
  const VectorXd b = run(0.8, 0.01);
  if ((a - b).lpNorm<Eigen::Infinity>() > opt.agree_tol)
    throw RelaxationError("relax_slow_graph: seeds did not equilibrate (gap " +
                          std::to_string((a - b).lpNorm<Eigen::Infinity>()) + ")");
  return a;
}

ConvergenceReport galerkin_convergence_check(const std::vector<int>& k0_list, int k_ref,
                                             const ConvergenceOptions& opt) {
  if (k0_list.empty()) throw DomainError("galerkin_convergence_check: empty k0 list");
  const int kmax = *std::max_element(k0_list.begin(), k0_list.end());
  if (k_ref < 2 * kmax) throw DomainError("galerkin_convergence_check: need k_ref >= 2 max(k0)");
  const SlowBox& b = opt.box;
  std::vector<VectorXd> pts;
  for (int i = 0; i < b.n1; ++i)
    for (int j = 0; j < b.n2; ++j) {
      VectorXd v = VectorXd::Zero(k_ref);
      v(0) = b.n1 == 1 ? b.v1_lo : b.v1_lo + (b.v1_hi - b.v1_lo) * i / (b.n1 - 1);
      if (k_ref >= 2) v(1) = b.n2 == 1 ? b.v2_lo : b.v2_lo + (b.v2_hi - b.v2_lo) * j / (b.n2 - 1);
      pts.push_back(v);
    }
  std::vector<VectorXd> ref;
  for (const auto& v : pts) ref.push_back(relax_slow_graph(v, k_ref, opt));

  ConvergenceReport rep;
  rep.k_ref = k_ref;
  for (int k0 : k0_list) {
    double d = 0.0;
    for (std::size_t n = 0; n < pts.size(); ++n) {
      VectorXd uk = VectorXd::Zero(k_ref);
      if (k0 == k_ref)
        uk = ref[n];
      else
        uk.head(k0) = relax_slow_graph(pts[n].head(k0), k0, opt);
      d = std::max(d, (uk - ref[n]).norm());
    }
    rep.k0.push_back(k0);
    rep.distance.push_back(d);
  }
  rep.monotone = true;
  for (std::size_t i = 1; i < rep.distance.size(); ++i)
    if (rep.k0[i] > rep.k0[i - 1] && rep.distance[i] > rep.distance[i - 1]) rep.monotone = false;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < rep.k0.size(); ++i)
    if (rep.distance[i] > 0) {
      lx.push_back(std::log(static_cast<double>(rep.k0[i])));
      ly.push_back(std::log(rep.distance[i]));
    }
  if (lx.size() >= 2) {
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / lx.size();
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / ly.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sxy += (lx[i] - mx) * (ly[i] - my);
      sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    rep.exponent_fit = -sxy / sxx;
  }
  return rep;
}

}  // namespace gfold
