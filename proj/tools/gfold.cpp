#include "config.hpp"
#include "experiments.hpp"
#include "manifest.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>

using namespace gfold::cli;
namespace fs = std::filesystem;

namespace {

int fail_validation(const std::vector<Violation>& vs) {
  json arr = json::array();
  for (const auto& v : vs) arr.push_back(to_json(v));
  std::cerr << json{{"error", "validation"}, {"violations", arr}}.dump() << '\n';
  return 2;
}

int fail_config(const std::string& msg) {
  std::cerr << json{{"error", "config"}, {"message", msg}}.dump() << '\n';
  return 2;
}

int fail_runtime(const std::string& stage, const std::string& msg) {
  std::cerr << json{{"error", "runtime"}, {"stage", stage}, {"message", msg}}.dump() << '\n';
  return 1;
}

std::string default_out(const RunConfig& c) {
  const char* root = std::getenv("GFOLD_OUT");
  const std::string base = (root && *root) ? root : "gfold_out";
  const std::string leaf = c.source.empty() ? c.experiment : fs::path(c.source).stem().string();
  return (fs::path(base) / leaf).string();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerics for a fold in a spectral Galerkin reaction-diffusion model"};
  app.require_subcommand(1);
  app.set_version_flag("--version", GFOLD_VERSION);

  std::string config_path, out_dir;
  RunOptions opt;
  app.add_option("--config", config_path, "config file (JSON, comments allowed)");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--workers", opt.workers, "worker threads for sweep and blowup-check")->check(CLI::PositiveNumber);
  app.add_flag("--quiet", opt.quiet, "print nothing on success");

  std::string chart, entry, section;
  std::map<std::string, CLI::App*> subs;
  for (const auto& name : experiment_names()) {
    auto* s = app.add_subcommand(name, "run the " + name + " experiment");
    s->fallthrough();
    s->add_option("config", config_path, "config file");
    if (name == "chart") {
      s->add_option("--chart", chart, "k1, k2 or k3");
      s->add_option("--entry", entry, "entry point file (JSON array or CSV row)");
      s->add_option("--exit-section", section, "<name>=<value>");
    }
    subs[name] = s;
  }
  auto* run = app.add_subcommand("run", "run the experiment named in a config");
  run->fallthrough();
  run->add_option("config", config_path, "config file")->required();
  auto* val = app.add_subcommand("validate", "check a config and report every violated rule");
  val->fallthrough();
  val->add_option("config", config_path, "config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail_config(e.what());
  }

  std::string sub;
  for (auto* s : app.get_subcommands()) sub = s->get_name();

  RunConfig cfg;
  try {
    if (!config_path.empty()) cfg = load_config(config_path);
  } catch (const gfold::ConfigError& e) {
    return fail_config(e.what());
  }
  if (sub != "run" && sub != "validate") {
    if (cfg.experiment.empty()) cfg.experiment = sub;
    if (cfg.experiment != sub)
      return fail_validation({{"experiment", cfg.experiment, "experiment_name",
                               "config names '" + cfg.experiment + "' but subcommand is '" + sub + "'"}});
  }
  if (!chart.empty()) opt.chart = chart;
  if (!entry.empty()) opt.entry_file = entry;
  if (!section.empty()) opt.exit_section = section;

  const auto violations = validate_config(cfg, opt);
  if (sub == "validate") {
    json arr = json::array();
    for (const auto& v : violations) arr.push_back(to_json(v));
    std::cout << json{{"config", config_path}, {"valid", violations.empty()}, {"violations", arr}}.dump(2) << '\n';
    return violations.empty() ? 0 : 2;
  }
  if (!violations.empty()) return fail_validation(violations);

  opt.out_dir = !out_dir.empty() ? out_dir : !cfg.output.empty() ? cfg.output : default_out(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    RunResult r = run_experiment(cfg, opt);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const std::string m = write_manifest(opt.out_dir, build_manifest(cfg, opt, r, wall));
    if (!opt.quiet) std::cout << m << '\n';
  } catch (const StageError& e) {
    return fail_runtime(e.stage, e.what());
  } catch (const gfold::ConfigError& e) {
    return fail_config(e.what());
  } catch (const std::exception& e) {
    return fail_runtime(cfg.experiment, e.what());
  }
  return 0;
}
