#pragma once

#include "gfold/integrate.hpp"
#include "gfold/vectorfields.hpp"

#include <json.hpp>

#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

namespace gfold::cli {

using nlohmann::json;

struct ModelConfig {
  int k0 = 2;
  double a = 0.5;
  double eps = 1e-3;
  std::vector<Monomial> higher_order;

  ModelParams params() const;
};

struct RunConfig {
  std::string experiment;
  std::uint64_t seed = 0;
  std::string output;
  ModelConfig model;
  IntegratorConfig integrator;
  json params = json::object();
  std::string source;  // file the config was read from, if any
};

struct Violation {
  std::string field;
  std::string value;
  std::string rule;
  std::string message;
};

json to_json(const Violation& v);

const std::vector<std::string>& experiment_names();
bool known_experiment(const std::string& name);

RunConfig parse_config(const json& j);
RunConfig load_config(const std::string& path);
json to_json(const RunConfig& c);
json to_json(const IntegratorConfig& c);

// Field access with type errors reported as ConfigError against ctx.key.
void reject_unknown(const json& j, std::initializer_list<const char*> keys, const std::string& ctx);

template <typename T>
T get_or(const json& j, const char* key, T def, const std::string& ctx) {
  if (!j.contains(key) || j.at(key).is_null()) return def;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(ctx + "." + key + ": wrong type");
  }
}

}  // namespace gfold::cli
