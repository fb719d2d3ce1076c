#include "experiments.hpp"

#include "gfold/charts.hpp"
#include "gfold/foldbound.hpp"
#include "gfold/manifold.hpp"
#include "gfold/numfmt.hpp"
#include "gfold/riccati.hpp"
#include "gfold/spectral.hpp"
#include "gfold/transition.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

namespace gfold::cli {

namespace fs = std::filesystem;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double uniform01(std::uint64_t seed, std::uint64_t index, std::uint64_t n) {
  const std::uint64_t h = splitmix64(splitmix64(seed ^ splitmix64(index)) + n);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw EstimationError("loglog_slope: need two or more points");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0) || !(y[i] > 0)) throw EstimationError("loglog_slope: values must be positive");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  const double n = static_cast<double>(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  return sxy / sxx;
}

namespace {

std::vector<double> to_vec(const VectorXd& v) { return {v.data(), v.data() + v.size()}; }

VectorXd from_vec(const std::vector<double>& v) {
  VectorXd x(static_cast<Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) x(static_cast<Index>(i)) = v[i];
  return x;
}

class Writer {
 public:
  Writer(std::string dir, RunResult& r) : dir_(std::move(dir)), r_(r) {}

  void text(const std::string& name, const std::string& body) {
    const fs::path p = fs::path(dir_) / name;
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
    std::ofstream out(p, std::ios::binary);
    if (!out) throw StageError("output", "cannot write '" + p.string() + "'");
    out << body;
    if (!out) throw StageError("output", "write failed for '" + p.string() + "'");
    r_.files.push_back(name);
  }
  void json_file(const std::string& name, const json& j) { text(name, j.dump(2) + "\n"); }

 private:
  std::string dir_;
  RunResult& r_;
};

std::string csv_row(const std::vector<double>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += ',';
    s += fmt(xs[i]);
  }
  return s + '\n';
}

template <class F>
void parallel_for(std::size_t n, int workers, F f) {
  std::vector<std::exception_ptr> errs(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (;;) {
      const std::size_t i = next++;
      if (i >= n) return;
      try {
        f(i);
      } catch (...) {
        errs[i] = std::current_exception();
      }
    }
  };
  const int w = std::max(1, std::min<int>(workers, static_cast<int>(n)));
  std::vector<std::thread> pool;
  for (int k = 1; k < w; ++k) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
}

void add(std::vector<Violation>& v, std::string field, double value, std::string rule, std::string msg) {
  v.push_back({std::move(field), fmt(value), std::move(rule), std::move(msg)});
}

// ---- transition parameters ----

struct TransitionBlock {
  TransitionParams tp;
  double eps0 = 1e-3;
  double du1 = 0.0;
  double uk_frac = 0.5;
  double vk_frac = 0.5;
};

TransitionBlock parse_transition(const json& p, const RunConfig& c, const std::string& ctx) {
  TransitionBlock b;
  b.tp.k0 = c.model.k0;
  b.tp.a = c.model.a;
  b.tp.eps = c.model.eps;
  auto& t = b.tp;
  t.rho = get_or(p, "rho", t.rho, ctx);
  t.delta = get_or(p, "delta", t.delta, ctx);
  t.C_in_u1 = get_or(p, "C_in_u1", t.C_in_u1, ctx);
  t.C_in_uk = get_or(p, "C_in_uk", t.C_in_uk, ctx);
  t.C_in_vk = get_or(p, "C_in_vk", t.C_in_vk, ctx);
  t.C_out = get_or(p, "C_out", t.C_out, ctx);
  t.sigma = get_or(p, "sigma", t.sigma, ctx);
  t.exit_constant = get_or(p, "exit_constant", t.exit_constant, ctx);
  t.variational = get_or(p, "variational", t.variational, ctx);
  t.spread_du = get_or(p, "spread_du", t.spread_du, ctx);
  b.eps0 = get_or(p, "eps0", b.eps0, ctx);
  b.du1 = get_or(p, "du1", b.du1, ctx);
  b.uk_frac = get_or(p, "uk_frac", b.uk_frac, ctx);
  b.vk_frac = get_or(p, "vk_frac", b.vk_frac, ctx);
  return b;
}

const std::initializer_list<const char*> transition_keys{
    "rho", "delta", "eps0", "C_in_u1", "C_in_uk", "C_in_vk", "C_out", "sigma", "exit_constant",
    "variational", "spread_du", "du1", "uk_frac", "vk_frac"};

void validate_transition(const TransitionBlock& b, const std::vector<double>& eps_list, std::vector<Violation>& v) {
  const auto& t = b.tp;
  try {
    t.validate();
  } catch (const ConfigError& e) {
    v.push_back({"params", "", "transition_params", e.what()});
    return;
  }
  const StabilityWindow w = k2_stability_window(t.delta, b.eps0, t.rho, t.a);
  if (!w.ok)
    add(v, "params.delta", t.delta, "k2_stability_window",
        "need " + fmt(w.lower) + " < delta < " + fmt(w.upper) + " for eps0 = " + fmt(b.eps0));
  for (double e : eps_list) {
    if (!(e > 0)) add(v, "eps", e, "eps_positive", "eps must be positive");
    else if (!(e <= b.eps0)) add(v, "eps", e, "eps_below_eps0", "need eps <= eps0 = " + fmt(b.eps0));
  }
  if (!(std::abs(b.du1) < t.C_in_u1))
    add(v, "params.du1", b.du1, "entry_u1", "need |u1 + 2^{1/4} rho| < C_in_u1 = " + fmt(t.C_in_u1));
  if (!(std::abs(b.uk_frac) <= 1.0))
    add(v, "params.uk_frac", b.uk_frac, "entry_uk", "need |u_k| <= C_in_uk, i.e. |uk_frac| <= 1");
  if (!(std::abs(b.vk_frac) <= 1.0))
    add(v, "params.vk_frac", b.vk_frac, "initial_data_eps43", "need |v_k| <= C_in_vk eps^{4/3}, i.e. |vk_frac| <= 1");
}

json downstairs_json(const Downstairs& d) { return {{"u", to_vec(d.u)}, {"v", to_vec(d.v)}, {"eps", d.eps}}; }

json report_json(const TransitionReport& r) {
  json bounds = json::array();
  for (const auto& b : r.bounds)
    bounds.push_back({{"name", b.name}, {"bound", b.bound}, {"observed", b.observed}, {"pass", b.pass}});
  json stages = json::array();
  for (const auto& s : r.stages)
    stages.push_back({{"label", s.label},
                      {"chart", to_string(s.chart)},
                      {"time", s.time},
                      {"entry", to_vec(s.entry)},
                      {"exit", to_vec(s.exit)},
                      {"eps_entry", s.eps_entry},
                      {"eps_exit", s.eps_exit}});
  json path = json::array();
  for (Chart c : r.path) path.push_back(to_string(c));
  json j = {{"entry", downstairs_json(r.entry)},
            {"exit", downstairs_json(r.exit)},
            {"time", r.time},
            {"path", path},
            {"stages", stages},
            {"bounds", bounds},
            {"bounds_pass", r.bounds_pass},
            {"eps_drift", r.eps_drift},
            {"exit_residual", r.exit_residual},
            {"v1_out", r.v1_out}};
  auto opt = [&](const char* k, const std::optional<double>& x) {
    if (x) j[k] = *x;
  };
  opt("v12_exit", r.v12_exit);
  opt("v12_predicted", r.v12_predicted);
  opt("eps3_exit", r.eps3_exit);
  opt("eps3_exit_exact", r.eps3_exit_exact);
  opt("eps3_exit_nominal", r.eps3_exit_nominal);
  opt("log_spread", r.log_spread);
  return j;
}

TransitionReport transition_or_throw(const Downstairs& entry, const TransitionParams& p, const IntegratorConfig& cfg) {
  try {
    return full_transition(entry, p, cfg);
  } catch (const TransitionError& e) {
    throw StageError(e.stage, e.what());
  }
}

// ---- blowup cases ----

const std::initializer_list<const char*> blowup_case_keys{"u1_0", "u2_0", "v1_0", "v2_0", "eps"};

BlowupConfig parse_case(const json& j, const std::string& ctx) {
  reject_unknown(j, blowup_case_keys, ctx);
  BlowupConfig b;
  b.u1_0 = get_or(j, "u1_0", b.u1_0, ctx);
  b.u2_0 = get_or(j, "u2_0", b.u2_0, ctx);
  b.v1_0 = get_or(j, "v1_0", b.v1_0, ctx);
  b.v2_0 = get_or(j, "v2_0", b.v2_0, ctx);
  b.eps = get_or(j, "eps", b.eps, ctx);
  return b;
}

std::vector<BlowupConfig> blowup_cases(const RunConfig& c) {
  const json& p = c.params;
  reject_unknown(p, {"cases", "random"}, "params");
  std::vector<BlowupConfig> cases;
  if (p.contains("cases")) {
    if (!p.at("cases").is_array()) throw ConfigError("params.cases: expected an array");
    std::size_t i = 0;
    for (const auto& j : p.at("cases")) cases.push_back(parse_case(j, "params.cases[" + std::to_string(i++) + "]"));
  }
  if (p.contains("random")) {
    const json& r = p.at("random");
    reject_unknown(r, {"n", "u1_0", "u2_0", "v1_0", "v2_0", "log10_eps"}, "params.random");
    const int n = get_or(r, "n", 0, "params.random");
    auto range = [&](const char* k, std::array<double, 2> def) {
      auto v = get_or<std::vector<double>>(r, k, {def[0], def[1]}, "params.random");
      if (v.size() != 2) throw ConfigError(std::string("params.random.") + k + ": expected [lo, hi]");
      return v;
    };
    const auto u1 = range("u1_0", {-0.5, 0.5}), u2 = range("u2_0", {-0.5, -0.1}), v1 = range("v1_0", {0.05, 0.5}),
               v2 = range("v2_0", {0.5, 1.5}), le = range("log10_eps", {-5, -2});
    for (int i = 0; i < n; ++i) {
      auto draw = [&](const std::vector<double>& lohi, std::uint64_t k) {
        return lohi[0] + (lohi[1] - lohi[0]) * uniform01(c.seed, static_cast<std::uint64_t>(i), k);
      };
      BlowupConfig b;
      b.u1_0 = draw(u1, 0);
      b.u2_0 = draw(u2, 1);
      b.v1_0 = draw(v1, 2);
      b.v2_0 = draw(v2, 3);
      b.eps = std::pow(10.0, draw(le, 4));
      cases.push_back(b);
    }
  }
  if (cases.empty()) cases.push_back(BlowupConfig{});
  return cases;
}

json verdict_json(const BlowupConfig& b, const BlowupVerdict& v) {
  json j = {{"u1_0", b.u1_0},
            {"u2_0", b.u2_0},
            {"v1_0", b.v1_0},
            {"v2_0", b.v2_0},
            {"eps", b.eps},
            {"deadline", v.sign_change_deadline},
            {"before_sign_change", v.before_sign_change},
            {"status", v.status},
            {"final_time", v.final_time},
            {"steps", v.steps},
            {"symmetry_applied", v.symmetry_applied},
            {"u1_0_in_reduced_range", v.u1_0_in_reduced_range},
            {"u2_nonpositive", v.u2_nonpositive},
            {"v2_exactness", v.v2_exactness}};
  j["blowup_time"] = v.blowup_time ? json(*v.blowup_time) : json(nullptr);
  if (v.eta) j["eta"] = *v.eta;
  if (v.eps_threshold) j["eps_threshold"] = *v.eps_threshold;
  return j;
}

const char* blowup_header = "u1_0,u2_0,v1_0,v2_0,eps,blowup_time,deadline,before_sign_change\n";

std::string verdict_row(const BlowupConfig& b, const BlowupVerdict& v) {
  std::string s = fmt(b.u1_0) + ',' + fmt(b.u2_0) + ',' + fmt(b.v1_0) + ',' + fmt(b.v2_0) + ',' + fmt(b.eps) + ',';
  s += v.blowup_time ? fmt(*v.blowup_time) : std::string();
  s += ',' + fmt(v.sign_change_deadline) + ',' + (v.before_sign_change ? "1" : "0") + '\n';
  return s;
}

// ---- simulate ----

struct SimulateParams {
  std::string system = "rescaled";
  std::vector<double> y0;
  double t1 = 10.0;
  double C_v0 = 1.0;
  std::vector<EventSpec> events;
};

std::vector<std::string> system_names(const std::string& system, int k0) {
  if (system == "example2") return {"u1", "v1", "u2", "v2"};
  return galerkin_names(k0);
}

SimulateParams parse_simulate(const RunConfig& c) {
  const json& p = c.params;
  reject_unknown(p, {"system", "y0", "t1", "C_v0", "events"}, "params");
  SimulateParams s;
  s.system = get_or(p, "system", s.system, "params");
  s.t1 = get_or(p, "t1", s.t1, "params");
  s.C_v0 = get_or(p, "C_v0", s.C_v0, "params");
  const int k0 = c.model.k0;
  if (s.system == "example2") {
    s.y0 = {0.0, 0.1, -0.3, 1.0};
  } else if (k0 >= 1) {
    s.y0.assign(2 * k0, 0.0);
    s.y0[0] = -std::pow(2.0, 0.25) * 0.5;
    s.y0[k0] = 0.25;
  }
  s.y0 = get_or(p, "y0", s.y0, "params");
  if (p.contains("events")) {
    const auto names = system_names(s.system, k0);
    for (const auto& e : p.at("events")) {
      reject_unknown(e, {"coordinate", "value", "direction", "terminal", "id"}, "params.events[]");
      const auto name = get_or<std::string>(e, "coordinate", "", "params.events[]");
      const auto it = std::find(names.begin(), names.end(), name);
      if (it == names.end()) throw ConfigError("params.events[].coordinate: unknown coordinate '" + name + "'");
      const auto dir = get_or<std::string>(e, "direction", "any", "params.events[]");
      Direction d = Direction::any;
      if (dir == "increasing")
        d = Direction::increasing;
      else if (dir == "decreasing")
        d = Direction::decreasing;
      else if (dir != "any")
        throw ConfigError("params.events[].direction: expected any, increasing or decreasing");
      s.events.push_back(EventSpec::coordinate_equals(it - names.begin(), get_or(e, "value", 0.0, "params.events[]"),
                                                      get_or<std::string>(e, "id", name, "params.events[]"), d,
                                                      get_or(e, "terminal", true, "params.events[]")));
    }
  }
  return s;
}

Field simulate_field(const std::string& system, const ModelParams& mp) {
  if (system == "rescaled") return [mp](double, const VectorXd& y) { return rhs_rescaled(y, mp); };
  if (system == "original") return [mp](double, const VectorXd& y) { return rhs_original(y, mp); };
  if (system == "slowtime") return [mp](double, const VectorXd& y) { return rhs_slowtime(y, mp); };
  if (system == "example2") {
    const double eps = mp.eps;
    return [eps](double, const VectorXd& y) { return rhs_example2(y, eps); };
  }
  throw ConfigError("params.system: expected rescaled, original, slowtime or example2");
}

// ---- chart ----

struct ChartRun {
  Chart chart = Chart::K1;
  std::vector<double> entry;
  std::string section;
  double value = 0.0;
  double t_max = 1e4;
  bool time_rescaled = true;
  std::optional<BoundConstants> bounds;
};

std::vector<double> read_entry_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("entry file '" + path + "' not readable");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string body = ss.str();
  const auto first = body.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && body[first] == '[') {
    try {
      return json::parse(body).get<std::vector<double>>();
    } catch (const json::exception& e) {
      throw ConfigError("entry file '" + path + "': " + e.what());
    }
  }
  // CSV: last non-comment line of numbers.
  std::vector<double> vals;
  std::istringstream lines(body);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(cells, cell, ',')) {
      try {
        std::size_t pos = 0;
        row.push_back(std::stod(cell, &pos));
        if (cell.find_first_not_of(" \t\r", pos) != std::string::npos) numeric = false;
      } catch (const std::exception&) {
        numeric = false;
      }
    }
    if (numeric && !row.empty()) vals = row;
  }
  if (vals.empty()) throw ConfigError("entry file '" + path + "' holds no numeric row");
  return vals;
}

ChartRun parse_chart(const RunConfig& c, const RunOptions& opt) {
  const json& p = c.params;
  reject_unknown(p, {"chart", "entry", "exit_section", "t_max", "time_rescaled", "bounds"}, "params");
  ChartRun r;
  r.chart = chart_from_string(opt.chart.value_or(get_or<std::string>(p, "chart", "k1", "params")));
  if (opt.entry_file)
    r.entry = read_entry_file(*opt.entry_file);
  else
    r.entry = get_or<std::vector<double>>(p, "entry", {}, "params");
  const std::string sec = opt.exit_section.value_or(get_or<std::string>(p, "exit_section", "", "params"));
  const auto eq = sec.find('=');
  if (eq == std::string::npos) throw ConfigError("exit_section: expected <name>=<value>");
  r.section = sec.substr(0, eq);
  try {
    std::size_t pos = 0;
    const std::string num = sec.substr(eq + 1);
    r.value = std::stod(num, &pos);
    if (pos != num.size()) throw ConfigError("x");
  } catch (const std::exception&) {
    throw ConfigError("exit_section: value is not a number");
  }
  r.t_max = get_or(p, "t_max", r.t_max, "params");
  r.time_rescaled = get_or(p, "time_rescaled", r.time_rescaled, "params");
  if (p.contains("bounds")) {
    const json& b = p.at("bounds");
    reject_unknown(b, {"rho", "delta", "sigma", "sigma_u", "sigma_v"}, "params.bounds");
    BoundConstants bc;
    bc.a = c.model.a;
    bc.rho = get_or(b, "rho", bc.rho, "params.bounds");
    bc.delta = get_or(b, "delta", bc.delta, "params.bounds");
    if (b.contains("sigma")) bc.sigma = get_or(b, "sigma", 1.0, "params.bounds");
    if (b.contains("sigma_u")) bc.sigma_u = get_or(b, "sigma_u", 1.0, "params.bounds");
    if (b.contains("sigma_v")) bc.sigma_v = get_or(b, "sigma_v", 1.0, "params.bounds");
    r.bounds = bc;
  }
  return r;
}

// ---- riccati ----

struct RiccatiParams {
  double u_start = -50.0;
  double u_end = 80.0;
  std::vector<double> deltas{1e-2, 1e-3, 1e-4};
};

RiccatiParams parse_riccati(const RunConfig& c) {
  reject_unknown(c.params, {"u_start", "u_end", "deltas"}, "params");
  RiccatiParams r;
  r.u_start = get_or(c.params, "u_start", r.u_start, "params");
  r.u_end = get_or(c.params, "u_end", r.u_end, "params");
  r.deltas = get_or(c.params, "deltas", r.deltas, "params");
  return r;
}

json fit_json(const AsymptoticFit& f) {
  return {{"u", f.u}, {"residual", f.residual}, {"coefficient", f.coefficient}, {"exponent", f.exponent}};
}

// ---- manifold ----

struct ManifoldParams {
  double u2_max = 0.1;
  int n = 41;
  std::vector<std::vector<double>> points;
  int grid_n = 21;  // default grid over (u1, u2), higher modes zero
  double grid_u1 = 1.0;
  double grid_u2 = 0.5;
  std::optional<std::vector<int>> k0_list;
  int k_ref = 16;
  ConvergenceOptions conv;
};

ManifoldParams parse_manifold(const RunConfig& c) {
  const json& p = c.params;
  reject_unknown(p, {"u2_max", "n", "points", "grid_n", "grid_u1", "grid_u2", "convergence"}, "params");
  ManifoldParams m;
  m.u2_max = get_or(p, "u2_max", m.u2_max, "params");
  m.n = get_or(p, "n", m.n, "params");
  m.points = get_or(p, "points", m.points, "params");
  m.grid_n = get_or(p, "grid_n", m.grid_n, "params");
  m.grid_u1 = get_or(p, "grid_u1", m.grid_u1, "params");
  m.grid_u2 = get_or(p, "grid_u2", m.grid_u2, "params");
  if (p.contains("convergence")) {
    const json& q = p.at("convergence");
    const std::string ctx = "params.convergence";
    reject_unknown(q, {"k0_list", "k_ref", "a", "eps_relax", "relax_time", "agree_tol", "n1", "n2"}, ctx);
    m.k0_list = get_or<std::vector<int>>(q, "k0_list", {2, 4, 8}, ctx);
    m.k_ref = get_or(q, "k_ref", m.k_ref, ctx);
    m.conv.a = get_or(q, "a", m.conv.a, ctx);
    m.conv.eps_relax = get_or(q, "eps_relax", m.conv.eps_relax, ctx);
    m.conv.relax_time = get_or(q, "relax_time", m.conv.relax_time, ctx);
    m.conv.agree_tol = get_or(q, "agree_tol", m.conv.agree_tol, ctx);
    m.conv.box.n1 = get_or(q, "n1", m.conv.box.n1, ctx);
    m.conv.box.n2 = get_or(q, "n2", m.conv.box.n2, ctx);
  }
  return m;
}

// ---- sweep ----

struct SweepParams {
  std::string kind = "transition";
  std::vector<double> eps_list{1e-5, 3e-5, 1e-4, 3e-4, 1e-3};
  int random_entries = 0;
  bool direct = true;
  TransitionBlock tb;
  BlowupConfig blowup;
};

SweepParams parse_sweep(const RunConfig& c) {
  const json& p = c.params;
  SweepParams s;
  s.kind = get_or(p, "kind", s.kind, "params");
  s.eps_list = get_or(p, "eps_list", s.eps_list, "params");
  if (s.kind == "transition") {
    std::vector<const char*> keys(transition_keys);
    for (const char* k : {"kind", "eps_list", "random_entries", "direct"}) keys.push_back(k);
    for (const auto& [k, _] : p.items())
      if (std::none_of(keys.begin(), keys.end(), [&](const char* x) { return k == x; }))
        throw ConfigError("params: unknown key '" + k + "'");
    s.random_entries = get_or(p, "random_entries", s.random_entries, "params");
    s.direct = get_or(p, "direct", s.direct, "params");
    s.tb = parse_transition(p, c, "params");
  } else if (s.kind == "blowup") {
    reject_unknown(p, {"kind", "eps_list", "u1_0", "u2_0", "v1_0", "v2_0"}, "params");
    json j = p;
    j.erase("kind");
    j.erase("eps_list");
    s.blowup = parse_case(j, "params");
  } else {
    throw ConfigError("params.kind: expected transition or blowup");
  }
  return s;
}

void validate_model(const RunConfig& c, std::vector<Violation>& v) {
  const auto& m = c.model;
  if (m.k0 < 1 || m.k0 > 64) add(v, "model.k0", m.k0, "model_k0", "k0 must lie in [1, 64]");
  if (!(m.a > 0)) add(v, "model.a", m.a, "model_a", "a must be positive");
  if (!(m.eps >= 0)) add(v, "model.eps", m.eps, "model_eps", "eps must be nonnegative");
  if (!m.higher_order.empty() && m.k0 >= 1) {
    try {
      (void)HigherOrderSpec::polynomial(m.k0, m.higher_order);
    } catch (const std::exception& e) {
      v.push_back({"model.higher_order", "", "higher_order_class", e.what()});
    }
  }
  try {
    c.integrator.validate();
  } catch (const ConfigError& e) {
    v.push_back({"integrator", "", "integrator", e.what()});
  }
}

void validate_experiment(const RunConfig& c, const RunOptions& opt, std::vector<Violation>& v) {
  const int k0 = c.model.k0;
  const std::string& x = c.experiment;
  if (x == "coeffs") {
    reject_unknown(c.params, {}, "params");
  } else if (x == "simulate") {
    const auto s = parse_simulate(c);
    (void)simulate_field(s.system, ModelParams(std::max(k0, 1), std::max(c.model.a, 1e-300), c.model.eps));
    const std::size_t dim = s.system == "example2" ? 4 : static_cast<std::size_t>(2 * k0);
    if (s.y0.size() != dim)
      add(v, "params.y0", static_cast<double>(s.y0.size()), "shape", "y0 must have length " + std::to_string(dim));
    if (!(s.t1 > 0)) add(v, "params.t1", s.t1, "t1_positive", "t1 must be positive");
    if (s.system == "slowtime" && !(c.model.eps > 0))
      add(v, "model.eps", c.model.eps, "model_eps", "the slow-time system needs eps > 0");
    if (s.system != "example2" && s.y0.size() == dim) {
      if (!(s.C_v0 > 0) || !(s.C_v0 <= 1)) add(v, "params.C_v0", s.C_v0, "C_v0", "C_v0 must lie in (0, 1]");
      const double bound = s.C_v0 * std::pow(c.model.eps, 4.0 / 3.0);
      for (int k = 2; k <= k0; ++k)
        if (!(std::abs(s.y0[k0 + k - 1]) <= bound))
          add(v, "params.y0[v" + std::to_string(k) + "]", s.y0[k0 + k - 1], "initial_data_eps43",
              "need |v_k(0)| <= C_v0 eps^{4/3} = " + fmt(bound));
    }
  } else if (x == "manifold") {
    const auto m = parse_manifold(c);
    if (k0 != 2 && !m.k0_list) add(v, "model.k0", k0, "manifold_k0", "the fold curve needs k0 = 2");
    if (!(m.u2_max > 0)) add(v, "params.u2_max", m.u2_max, "positive", "u2_max must be positive");
    if (m.n < 3) add(v, "params.n", m.n, "resolution", "n must be at least 3");
    if (m.grid_n < 2) add(v, "params.grid_n", m.grid_n, "resolution", "grid_n must be at least 2");
    for (const auto& pt : m.points)
      if (static_cast<int>(pt.size()) != k0)
        add(v, "params.points[]", static_cast<double>(pt.size()), "shape", "points need length k0");
    if (m.k0_list) {
      if (m.k0_list->empty()) v.push_back({"params.convergence.k0_list", "", "nonempty", "k0_list is empty"});
      else if (m.k_ref < 2 * *std::max_element(m.k0_list->begin(), m.k0_list->end()))
        add(v, "params.convergence.k_ref", m.k_ref, "k_ref", "need k_ref >= 2 max(k0_list)");
    }
  } else if (x == "chart") {
    if (opt.entry_file && !fs::exists(*opt.entry_file))
      v.push_back({"entry", *opt.entry_file, "file_exists", "entry file does not exist"});
    else {
      const auto r = parse_chart(c, opt);
      const auto names = chart_names(r.chart, k0);
      if (r.entry.size() != names.size())
        add(v, "params.entry", static_cast<double>(r.entry.size()), "shape",
            "entry must have length 2 k0 + 1 = " + std::to_string(names.size()));
      if (std::find(names.begin(), names.end(), r.section) == names.end())
        v.push_back({"exit_section", r.section, "section_name", "unknown coordinate for this chart"});
      if (!(r.value > 0)) add(v, "exit_section", r.value, "section_value", "section value must be positive");
      if (!(r.t_max > 0)) add(v, "params.t_max", r.t_max, "positive", "t_max must be positive");
    }
  } else if (x == "riccati") {
    const auto r = parse_riccati(c);
    if (!(r.u_start <= -20)) add(v, "params.u_start", r.u_start, "u_start", "need u_start <= -20");
    if (!(r.u_end >= 20)) add(v, "params.u_end", r.u_end, "u_end", "need u_end >= 20");
    for (double d : r.deltas)
      if (!(d > 0) || !(d <= 1)) add(v, "params.deltas[]", d, "delta_range", "delta must lie in (0, 1]");
  } else if (x == "transition") {
    reject_unknown(c.params, transition_keys, "params");
    validate_transition(parse_transition(c.params, c, "params"), {c.model.eps}, v);
  } else if (x == "blowup-check") {
    for (const auto& b : blowup_cases(c)) {
      if (!(b.v1_0 > 0)) add(v, "params.cases[].v1_0", b.v1_0, "v1_0_positive", "v1_0 must be positive");
      if (!(b.eps > 0)) add(v, "params.cases[].eps", b.eps, "eps_positive", "eps must be positive");
    }
  } else if (x == "sweep") {
    const auto s = parse_sweep(c);
    if (s.eps_list.size() < 2) v.push_back({"params.eps_list", "", "eps_list", "need at least two eps values"});
    if (s.kind == "transition") {
      validate_transition(s.tb, s.eps_list, v);
      if (s.random_entries < 0) add(v, "params.random_entries", s.random_entries, "nonnegative", "must be >= 0");
    } else {
      if (!(s.blowup.v1_0 > 0)) add(v, "params.v1_0", s.blowup.v1_0, "v1_0_positive", "v1_0 must be positive");
      for (double e : s.eps_list)
        if (!(e > 0)) add(v, "params.eps_list[]", e, "eps_positive", "eps must be positive");
    }
  }
}

// ---- runners ----

void run_coeffs(const RunConfig& c, Writer& w, RunResult& res) {
  const int k0 = c.model.k0;
  std::string a = "k,lambda,b\n";
  for (int k = 1; k <= k0; ++k) a += std::to_string(k) + ',' + fmt(eigenvalue(k, c.model.a)) + ',' + fmt(b_coefficient(k)) + '\n';
  w.text("coefficients.csv", a);
  std::string t = "k,i,j,eta\n";
  int nonzero = 0;
  const auto rows = coupling_table(k0);
  for (const auto& r : rows) {
    t += std::to_string(r.k) + ',' + std::to_string(r.i) + ',' + std::to_string(r.j) + ',' + fmt(r.eta) + '\n';
    if (r.eta != 0) ++nonzero;
  }
  w.text("eta_table.csv", t);
  res.summary = {{"k0", k0}, {"a", c.model.a}, {"eta_rows", rows.size()}, {"eta_nonzero", nonzero}};
}

void run_simulate(const RunConfig& c, Writer& w, RunResult& res) {
  const auto s = parse_simulate(c);
  const ModelParams mp = c.model.params();
  const Field f = simulate_field(s.system, mp);
  Trajectory tr;
  try {
    tr = integrate(f, from_vec(s.y0), 0.0, s.t1, c.integrator, s.events);
  } catch (const IntegrationError& e) {
    throw StageError("simulate", e.what());
  }
  std::ostringstream os;
  write_csv(os, tr, system_names(s.system, c.model.k0));
  w.text("trajectory.csv", os.str());
  json ev = json::array();
  for (const auto& e : tr.events) ev.push_back({{"id", e.id}, {"t", e.t}});
  res.summary = {{"system", s.system},
                 {"status", to_string(tr.status)},
                 {"final_time", tr.final_time()},
                 {"final_state", to_vec(tr.final_state())},
                 {"steps", tr.times.size() - 1},
                 {"rejected_steps", tr.rejected_steps},
                 {"field_evals", tr.field_evals},
                 {"events", ev}};
  if (tr.status == Status::blowup_detected) {
    try {
      res.summary["blowup_time_estimate"] = blowup_time_estimate(tr);
    } catch (const EstimationError&) {
    }
  }
  w.json_file("simulate.json", res.summary);
}

void run_manifold(const RunConfig& c, Writer& w, RunResult& res) {
  const auto m = parse_manifold(c);
  const int k0 = c.model.k0;
  const Basis basis(k0, c.model.a);
  json j = json::object();
  if (k0 == 2) {
    const SlowImageCurve curve = slow_image_of_boundary(basis, m.u2_max, m.n);
    std::string t = "u1,u2,v1,v2,g_nominal\n";
    for (std::size_t i = 0; i < curve.u1.size(); ++i)
      t += csv_row({curve.u1[i], curve.u2[i], curve.v1[i], curve.v2[i], g_nominal(curve.u2[i])});
    w.text("fold_curve.csv", t);
    j["slow_image_fit"] = {{"quad", to_vec(curve.quad)}, {"fit_residual", curve.fit_residual}};
  }
  std::vector<std::vector<double>> pts = m.points;
  if (pts.empty() && k0 >= 2)
    for (int i = 0; i < m.grid_n; ++i)
      for (int l = 0; l < m.grid_n; ++l) {
        std::vector<double> u(k0, 0.0);
        u[0] = -m.grid_u1 + 2.0 * m.grid_u1 * i / (m.grid_n - 1);
        u[1] = -m.grid_u2 + 2.0 * m.grid_u2 * l / (m.grid_n - 1);
        pts.push_back(u);
      }
  std::string g;
  for (int k = 1; k <= k0; ++k) g += "u" + std::to_string(k) + ',';
  g += "max_real,class\n";
  for (const auto& p : pts) {
    const CriticalPoint cp = critical_point(from_vec(p), basis);
    std::string row = csv_row(p);
    row.pop_back();
    g += row + ',' + fmt(cp.cls.max_real) + ',' + cp.cls.label() + '\n';
  }
  w.text("classification.csv", g);
  j["classified_points"] = pts.size();
  if (m.k0_list) {
    ConvergenceReport r;
    try {
      r = galerkin_convergence_check(*m.k0_list, m.k_ref, m.conv);
    } catch (const RelaxationError& e) {
      throw StageError("convergence", e.what());
    }
    std::string t = "k0,distance\n";
    for (std::size_t i = 0; i < r.k0.size(); ++i) t += std::to_string(r.k0[i]) + ',' + fmt(r.distance[i]) + '\n';
    w.text("convergence.csv", t);
    j["convergence"] = {{"k0", r.k0}, {"distance", r.distance}, {"k_ref", r.k_ref},
                        {"exponent_fit", r.exponent_fit}, {"monotone", r.monotone}};
    w.json_file("convergence.json", j["convergence"]);
  }
  res.summary = j;
  w.json_file("manifold.json", j);
}

void run_chart(const RunConfig& c, const RunOptions& opt, Writer& w, RunResult& res) {
  const ChartRun r = parse_chart(c, opt);
  const int k0 = c.model.k0;
  const auto names = chart_names(r.chart, k0);
  const ChartState entry{r.chart, from_vec(r.entry)};
  double eps = blowdown(entry).eps;
  if (!(eps > 0)) eps = c.model.eps;
  const ChartParams cp = ChartParams::from_domain(k0, c.model.a, eps);
  const Index idx = std::find(names.begin(), names.end(), r.section) - names.begin();
  const bool eps_slot = r.chart != Chart::K2 && idx == 2 * k0;
  const double target = eps_slot ? std::cbrt(r.value) : r.value;
  Field f;
  switch (r.chart) {
    case Chart::K1:
      f = [&cp](double, const VectorXd& y) { return rhs_K1_smooth(y, cp); };
      break;
    case Chart::K2:
      f = [&cp](double, const VectorXd& y) { return rhs_K2(y, cp); };
      break;
    case Chart::K3:
      if (r.time_rescaled)
        f = [&cp](double, const VectorXd& y) { return rhs_K3_time_rescaled(y, cp); };
      else
        f = [&cp](double, const VectorXd& y) { return rhs_K3_smooth(y, cp); };
      break;
  }
  Trajectory tr;
  try {
    tr = integrate(f, to_smooth(entry), 0.0, r.t_max, c.integrator, {EventSpec::coordinate_equals(idx, target, r.section)});
  } catch (const IntegrationError& e) {
    throw StageError(std::string("chart ") + to_string(r.chart), e.what());
  } catch (const SingularRescaleError& e) {
    throw StageError(std::string("chart ") + to_string(r.chart), e.what());
  }
  Trajectory out = tr;
  double drift = 0.0;
  for (auto& y : out.states) {
    y = from_smooth(r.chart, y).coords;
    const double e = blowdown({r.chart, y}).eps;
    if (eps > 0) drift = std::max(drift, std::abs(e - eps) / eps);
  }
  for (auto& e : out.events) e.y = from_smooth(r.chart, e.y).coords;
  std::ostringstream os;
  write_csv(os, out, names);
  w.text("chart_trajectory.csv", os.str());
  json exitj = json::object();
  for (std::size_t i = 0; i < names.size(); ++i) exitj[names[i]] = out.final_state()(static_cast<Index>(i));
  res.summary = {{"chart", to_string(r.chart)},
                 {"status", to_string(tr.status)},
                 {"section", r.section},
                 {"section_value", r.value},
                 {"section_hit", tr.status == Status::event_terminated},
                 {"exit_time", tr.final_time()},
                 {"exit", exitj},
                 {"eps", eps},
                 {"eps_drift", drift}};
  if (r.bounds) {
    try {
      const BoundReport b = verify_chart_bounds(tr, r.chart, k0, *r.bounds);
      json items = json::array();
      for (const auto& it : b.items)
        items.push_back({{"name", it.name}, {"bound", it.bound}, {"observed", it.observed}, {"pass", it.pass}});
      res.summary["bounds"] = items;
      res.summary["bounds_max_ratio"] = b.max_ratio;
    } catch (const ConfigError& e) {
      throw;
    } catch (const std::exception& e) {
      throw StageError("bounds", e.what());
    }
  }
  w.json_file("chart.json", res.summary);
}

void run_riccati(const RunConfig& c, Writer& w, RunResult& res) {
  const auto rp = parse_riccati(c);
  RiccatiOrbit o;
  try {
    o = riccati_gamma2(rp.u_start, rp.u_end);
  } catch (const ShootingError& e) {
    throw StageError("riccati", e.what());
  }
  std::string t = "u,s\n";
  for (std::size_t i = 0; i < o.u.size(); ++i) t += csv_row({o.u[i], o.s[i]});
  w.text("gamma2.csv", t);
  json pi2s = json::array();
  std::vector<double> rp_nominal, rp_corrected;
  const int k0 = std::max(c.model.k0, 1);
  const ChartParams cp = ChartParams::from_domain(k0, c.model.a, c.model.eps > 0 ? c.model.eps : 1e-3);
  for (double d : rp.deltas) {
    StageResult s;
    try {
      s = pi2(q0(d, k0), cp, d, c.integrator);
    } catch (const TransitionError& e) {
      throw StageError(e.stage, e.what());
    }
    const double v = s.exit.coords(1);
    const double nominal = -omega0_golden + sqrt2 * std::cbrt(d), corrected = -omega0_golden + 2.0 * std::cbrt(d);
    rp_nominal.push_back(std::abs(v - nominal));
    rp_corrected.push_back(std::abs(v - corrected));
    pi2s.push_back({{"delta", d},
                    {"v_exit", v},
                    {"predicted_nominal", nominal},
                    {"residual_nominal", rp_nominal.back()},
                    {"predicted_corrected", corrected},
                    {"residual_corrected", rp_corrected.back()}});
  }
  res.summary = {{"omega0_direct", o.omega0_direct},
                 {"omega0_richardson", o.omega0_richardson},
                 {"omega0_golden", omega0_golden},
                 {"omega0_golden_tol", omega0_golden_tol},
                 {"omega0_agreement", std::abs(o.omega0_direct - o.omega0_richardson)},
                 {"left_nominal", fit_json(o.left_nominal)},
                 {"left_corrected", fit_json(o.left_corrected)},
                 {"right_nominal", fit_json(o.right_nominal)},
                 {"right_corrected", fit_json(o.right_corrected)},
                 {"pi2", pi2s}};
  if (rp.deltas.size() >= 2) {
    res.summary["pi2_exponent_nominal"] = loglog_slope(rp.deltas, rp_nominal);
    res.summary["pi2_exponent_corrected"] = loglog_slope(rp.deltas, rp_corrected);
  }
  w.json_file("riccati.json", res.summary);
}

void run_transition(const RunConfig& c, Writer& w, RunResult& res) {
  const auto b = parse_transition(c.params, c, "params");
  const Downstairs entry = make_entry(b.tp, b.du1, b.uk_frac, b.vk_frac);
  const TransitionReport r = transition_or_throw(entry, b.tp, c.integrator);
  res.summary = report_json(r);
  w.json_file("transition.json", res.summary);
}

void run_blowup(const RunConfig& c, const RunOptions& opt, Writer& w, RunResult& res) {
  const auto cases = blowup_cases(c);
  std::vector<BlowupVerdict> out(cases.size());
  parallel_for(cases.size(), opt.workers,
               [&](std::size_t i) { out[i] = verify_blowup_before_sign_change(cases[i], c.integrator); });
  std::string t = blowup_header;
  json rows = json::array();
  int before = 0;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    t += verdict_row(cases[i], out[i]);
    rows.push_back(verdict_json(cases[i], out[i]));
    before += out[i].before_sign_change;
  }
  w.text("blowup.csv", t);
  res.summary = {{"cases", rows}, {"n_cases", cases.size()}, {"n_before_sign_change", before}};
  w.json_file("blowup.json", res.summary);
}


std::string case_name(std::size_t i) {
  std::string s = std::to_string(i);
  return "cases/case_" + std::string(s.size() < 4 ? 4 - s.size() : 0, '0') + s + ".json";
}

void run_sweep(const RunConfig& c, const RunOptions& opt, Writer& w, RunResult& res) {
  const auto s = parse_sweep(c);
  if (s.kind == "blowup") {
    std::vector<BlowupConfig> cases;
    for (double e : s.eps_list) {
      BlowupConfig b = s.blowup;
      b.eps = e;
      cases.push_back(b);
    }
    std::vector<BlowupVerdict> out(cases.size());
    parallel_for(cases.size(), opt.workers,
                 [&](std::size_t i) { out[i] = verify_blowup_before_sign_change(cases[i], c.integrator); });
    std::string t = std::string("index,") + blowup_header;
    for (std::size_t i = 0; i < cases.size(); ++i) {
      w.json_file(case_name(i), verdict_json(cases[i], out[i]));
      t += std::to_string(i) + ',' + verdict_row(cases[i], out[i]);
    }
    w.text("sweep.csv", t);
    // before at eps implies before at every smaller eps in the list
    bool mono = true;
    for (std::size_t i = 0; i < cases.size(); ++i)
      for (std::size_t j = 0; j < cases.size(); ++j)
        if (cases[j].eps < cases[i].eps && out[i].before_sign_change && !out[j].before_sign_change) mono = false;
    json rows = json::array();
    for (std::size_t i = 0; i < cases.size(); ++i) rows.push_back(verdict_json(cases[i], out[i]));
    res.summary = {{"kind", "blowup"}, {"cases", rows}, {"monotone_in_eps", mono}};
    w.json_file("sweep.json", res.summary);
    return;
  }

  struct Case {
    double eps, du1, uk_frac, vk_frac;
    int entry;
  };
  std::vector<Case> cases;
  const int per = std::max(1, s.random_entries);
  for (std::size_t e = 0; e < s.eps_list.size(); ++e)
    for (int j = 0; j < per; ++j) {
      Case k{s.eps_list[e], s.tb.du1, s.tb.uk_frac, s.tb.vk_frac, j};
      if (s.random_entries > 0) {
        const std::uint64_t idx = static_cast<std::uint64_t>(j);
        k.du1 = s.tb.tp.C_in_u1 * (2.0 * uniform01(c.seed, idx, 0) - 1.0) * 0.5;
        k.uk_frac = 2.0 * uniform01(c.seed, idx, 1) - 1.0;
        k.vk_frac = 2.0 * uniform01(c.seed, idx, 2) - 1.0;
      }
      cases.push_back(k);
    }
  struct Out {
    TransitionReport rep;
    double direct = 0.0;
  };
  std::vector<Out> out(cases.size());
  parallel_for(cases.size(), opt.workers, [&](std::size_t i) {
    TransitionParams p = s.tb.tp;
    p.eps = cases[i].eps;
    p.variational = true;
    const Case& k = cases[i];
    out[i].rep = transition_or_throw(make_entry(p, k.du1, k.uk_frac, k.vk_frac), p, c.integrator);
    if (s.direct) {
      TransitionParams q = p;
      q.variational = false;
      const TransitionReport b = transition_or_throw(make_entry(q, k.du1 + p.spread_du, k.uk_frac, k.vk_frac), q, c.integrator);
      VectorXd za(2 * p.k0), zb(2 * p.k0);
      za << out[i].rep.exit.u, out[i].rep.exit.v;
      zb << b.exit.u, b.exit.v;
      out[i].direct = (za - zb).norm();
    }
  });
  std::string t = "index,eps,entry,du1,uk_frac,vk_frac,v1_out,log_spread,direct_spread,bounds_pass,path\n";
  json rows = json::array();
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto& k = cases[i];
    const auto& r = out[i].rep;
    std::string path;
    for (Chart ch : r.path) path += std::string(path.empty() ? "" : "-") + to_string(ch);
    t += std::to_string(i) + ',' + fmt(k.eps) + ',' + std::to_string(k.entry) + ',' + fmt(k.du1) + ',' + fmt(k.uk_frac) +
         ',' + fmt(k.vk_frac) + ',' + fmt(r.v1_out) + ',' + fmt(r.log_spread.value_or(std::nan(""))) + ',' +
         fmt(out[i].direct) + ',' + (r.bounds_pass ? "1" : "0") + ',' + path + '\n';
    json cj = report_json(r);
    cj["eps"] = k.eps;
    cj["direct_spread"] = out[i].direct;
    w.json_file(case_name(i), cj);
    rows.push_back({{"eps", k.eps}, {"entry", k.entry}, {"v1_out", r.v1_out},
                    {"log_spread", r.log_spread.value_or(std::nan(""))}, {"direct_spread", out[i].direct},
                    {"bounds_pass", r.bounds_pass}});
  }
  w.text("sweep.csv", t);
  std::vector<double> xe, yv;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    xe.push_back(cases[i].eps);
    yv.push_back(out[i].rep.v1_out);
  }
  // Spread must shrink as eps shrinks, compared within each entry stream.
  bool mono = true;
  for (int j = 0; j < per; ++j) {
    std::vector<std::pair<double, double>> es;
    for (std::size_t i = 0; i < cases.size(); ++i)
      if (cases[i].entry == j) es.push_back({cases[i].eps, out[i].rep.log_spread.value_or(0.0)});
    std::sort(es.begin(), es.end());
    for (std::size_t i = 1; i < es.size(); ++i)
      if (!(es[i].second > es[i - 1].second)) mono = false;
  }
  res.summary = {{"kind", "transition"},
                 {"slope", loglog_slope(xe, yv)},
                 {"contraction_monotone", mono},
                 {"n_cases", cases.size()},
                 {"cases", rows}};
  w.json_file("sweep.json", res.summary);
}

}  // namespace

std::vector<Violation> validate_config(const RunConfig& c, const RunOptions& opt) {
  std::vector<Violation> v;
  if (!known_experiment(c.experiment)) {
    v.push_back({"experiment", c.experiment, "experiment_name", "unknown experiment"});
    return v;
  }
  validate_model(c, v);
  if (!v.empty()) return v;
  try {
    validate_experiment(c, opt, v);
  } catch (const ConfigError& e) {
    v.push_back({"params", "", "parse", e.what()});
  } catch (const DomainError& e) {
    v.push_back({"params", "", "domain", e.what()});
  }
  return v;
}

RunResult run_experiment(const RunConfig& c, const RunOptions& opt) {
  RunResult res;
  std::error_code ec;
  fs::create_directories(opt.out_dir, ec);
  if (ec || !fs::is_directory(opt.out_dir)) throw StageError("output", "cannot create output directory '" + opt.out_dir + "'");
  Writer w(opt.out_dir, res);
  const std::string& x = c.experiment;
  try {
    if (x == "coeffs")
      run_coeffs(c, w, res);
    else if (x == "simulate")
      run_simulate(c, w, res);
    else if (x == "manifold")
      run_manifold(c, w, res);
    else if (x == "chart")
      run_chart(c, opt, w, res);
    else if (x == "riccati")
      run_riccati(c, w, res);
    else if (x == "transition")
      run_transition(c, w, res);
    else if (x == "blowup-check")
      run_blowup(c, opt, w, res);
    else if (x == "sweep")
      run_sweep(c, opt, w, res);
    else
      throw ConfigError("unknown experiment '" + x + "'");
  } catch (const StageError&) {
    throw;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(x, e.what());
  }
  return res;
}

}  // namespace gfold::cli
