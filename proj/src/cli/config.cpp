#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace gfold::cli {

ModelParams ModelConfig::params() const {
  ModelParams p(k0, a, eps);
  if (!higher_order.empty()) p.hot = HigherOrderSpec::polynomial(k0, higher_order);
  return p;
}

json to_json(const Violation& v) {
  return {{"field", v.field}, {"value", v.value}, {"rule", v.rule}, {"message", v.message}};
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"coeffs",     "simulate",     "manifold", "chart",
                                              "riccati",    "transition",   "blowup-check", "sweep"};
  return names;
}

bool known_experiment(const std::string& name) {
  const auto& n = experiment_names();
  return std::find(n.begin(), n.end(), name) != n.end();
}

void reject_unknown(const json& j, std::initializer_list<const char*> keys, const std::string& ctx) {
  if (!j.is_object()) throw ConfigError(ctx + ": expected an object");
  for (const auto& [k, _] : j.items())
    if (std::none_of(keys.begin(), keys.end(), [&](const char* s) { return k == s; }))
      throw ConfigError(ctx + ": unknown key '" + k + "'");
}

namespace {

IntegratorConfig parse_integrator(const json& j) {
  IntegratorConfig c;
  reject_unknown(j, {"rel_tol", "abs_tol", "max_step", "blowup_norm", "min_step", "stiff_mode", "max_steps"},
                 "integrator");
  c.rel_tol = get_or(j, "rel_tol", c.rel_tol, "integrator");
  c.abs_tol = get_or(j, "abs_tol", c.abs_tol, "integrator");
  c.max_step = get_or(j, "max_step", c.max_step, "integrator");
  c.blowup_norm = get_or(j, "blowup_norm", c.blowup_norm, "integrator");
  c.min_step = get_or(j, "min_step", c.min_step, "integrator");
  c.max_steps = get_or(j, "max_steps", c.max_steps, "integrator");
  const auto mode = get_or<std::string>(j, "stiff_mode", "explicit", "integrator");
  if (mode == "explicit")
    c.stiff_mode = StiffMode::explicit_rk;
  else if (mode == "semi_implicit")
    c.stiff_mode = StiffMode::semi_implicit;
  else
    throw ConfigError("integrator.stiff_mode: expected 'explicit' or 'semi_implicit'");
  c.keep_dense = false;
  return c;
}

ModelConfig parse_model(const json& j) {
  ModelConfig m;
  reject_unknown(j, {"k0", "a", "eps", "higher_order"}, "model");
  m.k0 = get_or(j, "k0", m.k0, "model");
  m.a = get_or(j, "a", m.a, "model");
  m.eps = get_or(j, "eps", m.eps, "model");
  if (j.contains("higher_order")) {
    const json& h = j.at("higher_order");
    if (!h.is_array()) throw ConfigError("model.higher_order: expected an array");
    for (const auto& t : h) {
      reject_unknown(t, {"target", "coeff", "powers"}, "model.higher_order[]");
      Monomial mono;
      mono.target = get_or<std::string>(t, "target", "", "model.higher_order[]");
      mono.coeff = get_or(t, "coeff", 0.0, "model.higher_order[]");
      mono.powers = get_or<std::vector<int>>(t, "powers", {}, "model.higher_order[]");
      m.higher_order.push_back(mono);
    }
  }
  return m;
}

}  // namespace

RunConfig parse_config(const json& j) {
  reject_unknown(j, {"experiment", "seed", "output", "model", "integrator", "params"}, "config");
  RunConfig c;
  c.experiment = get_or<std::string>(j, "experiment", "", "config");
  c.seed = get_or<std::uint64_t>(j, "seed", 0, "config");
  c.output = get_or<std::string>(j, "output", "", "config");
  if (j.contains("model")) c.model = parse_model(j.at("model"));
  c.integrator = j.contains("integrator") ? parse_integrator(j.at("integrator")) : parse_integrator(json::object());
  if (j.contains("params")) {
    if (!j.at("params").is_object()) throw ConfigError("config.params: expected an object");
    c.params = j.at("params");
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path + "'");
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  RunConfig c = parse_config(j);
  c.source = path;
  return c;
}

json to_json(const IntegratorConfig& c) {
  json j = {{"rel_tol", c.rel_tol},
            {"abs_tol", c.abs_tol},
            {"blowup_norm", c.blowup_norm},
            {"min_step", c.min_step},
            {"max_steps", c.max_steps},
            {"stiff_mode", c.stiff_mode == StiffMode::explicit_rk ? "explicit" : "semi_implicit"}};
  if (std::isfinite(c.max_step)) j["max_step"] = c.max_step;
  return j;
}

json to_json(const RunConfig& c) {
  json model = {{"k0", c.model.k0}, {"a", c.model.a}, {"eps", c.model.eps}};
  if (!c.model.higher_order.empty()) {
    json h = json::array();
    for (const auto& m : c.model.higher_order) h.push_back({{"target", m.target}, {"coeff", m.coeff}, {"powers", m.powers}});
    model["higher_order"] = h;
  }
  json j = {{"experiment", c.experiment},
            {"seed", c.seed},
            {"model", model},
            {"integrator", to_json(c.integrator)},
            {"params", c.params}};
  if (!c.output.empty()) j["output"] = c.output;
  return j;
}

}  // namespace gfold::cli
