#include "gfold/vectorfields.hpp"

#include <numeric>

namespace gfold {

GalerkinState GalerkinState::from_flat(const VectorXd& y) {
  if (y.size() % 2 != 0) throw ShapeError("GalerkinState: flat length must be even");
  const Index k0 = y.size() / 2;
  return {y.head(k0), y.tail(k0)};
}

VectorXd GalerkinState::flat() const {
  require_shape(v.size(), u.size(), "GalerkinState");
  VectorXd y(2 * u.size());
  y << u, v;
  return y;
}

namespace {

struct Target {
  char block;  // 'u' or 'v'
  int k;
};

Target parse_target(int k0, const std::string& t) {
  if (t.size() < 2 || (t[0] != 'u' && t[0] != 'v'))
    throw ConfigError("higher-order term: bad target '" + t + "'");
  int k = 0;
  try {
    k = std::stoi(t.substr(1));
  } catch (const std::exception&) {
    throw ConfigError("higher-order term: bad target '" + t + "'");
  }
  if (k < 1 || k > k0) throw ConfigError("higher-order term: mode out of range in '" + t + "'");
  if (t[0] == 'v' && k == 1)
    throw ConfigError("higher-order term: v1 carries no correction (H^v is orthogonal to constants)");
  return {t[0], k};
}

}  // namespace

bool HigherOrderSpec::admissible(int k0, const std::string& target, const std::vector<int>& p) {
  const Target t = parse_target(k0, target);
  if (static_cast<int>(p.size()) != 2 * k0 + 1) return false;
  for (int e : p)
    if (e < 0) return false;
  auto U = [&](int i) { return p[i - 1]; };
  auto V = [&](int i) { return p[k0 + i - 1]; };
  const int E = p[2 * k0];
  int su = 0, sv = 0;
  bool same_uv = false, vsq = false, usq = false;
  for (int i = 2; i <= k0; ++i) {
    su += U(i);
    sv += V(i);
    same_uv = same_uv || (U(i) >= 1 && V(i) >= 1);
    vsq = vsq || V(i) >= 2;
    usq = usq || U(i) >= 2;
  }
  if (t.block == 'u' && t.k == 1) {
    return E >= 1 || V(1) >= 2 || vsq || (U(1) >= 1 && V(1) >= 1) || same_uv ||
           (U(1) >= 1 && usq) || su >= 3;
  }
  const int k = t.k;
  if (t.block == 'v') return (V(1) >= 1 && V(k) >= 1) || sv >= 2;
  return (V(1) >= 1 && V(k) >= 1) || sv >= 2 || (U(1) >= 1 && V(k) >= 1) ||
         (U(k) >= 1 && V(1) >= 1) || (su >= 1 && sv >= 1) || (U(1) >= 2 && U(k) >= 1) ||
         (U(1) >= 1 && su >= 2) || su >= 3;
}

HigherOrderSpec HigherOrderSpec::polynomial(int k0, std::vector<Monomial> terms) {
  HigherOrderSpec h;
  h.k0_ = k0;
  for (const auto& m : terms) {
    if (static_cast<int>(m.powers.size()) != 2 * k0 + 1)
      throw ConfigError("higher-order term for " + m.target + ": expected " +
                        std::to_string(2 * k0 + 1) + " exponents");
    if (!admissible(k0, m.target, m.powers))
      throw ConfigError("higher-order term for " + m.target +
                        ": monomial is below the admissible order class");
    const Target t = parse_target(k0, m.target);
    h.target_index_.push_back(t.block == 'u' ? t.k - 1 : k0 + t.k - 1);
  }
  h.terms_ = std::move(terms);
  return h;
}

}  // namespace gfold
