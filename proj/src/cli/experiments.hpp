#pragma once

#include "config.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gfold::cli {

// Runtime failure inside an experiment, tagged with the stage that failed.
struct StageError : std::runtime_error {
  StageError(std::string stage, const std::string& what) : std::runtime_error(what), stage(std::move(stage)) {}
  std::string stage;
};

struct RunOptions {
  std::string out_dir;
  int workers = 1;
  bool quiet = false;
  // chart subcommand overrides
  std::optional<std::string> chart;
  std::optional<std::string> entry_file;
  std::optional<std::string> exit_section;
};

struct RunResult {
  std::vector<std::string> files;  // relative to out_dir, in emission order
  json summary;
};

// Counter-based stream: value n of stream (seed, index).
std::uint64_t splitmix64(std::uint64_t x);
double uniform01(std::uint64_t seed, std::uint64_t index, std::uint64_t n);

std::vector<Violation> validate_config(const RunConfig& c, const RunOptions& opt = {});
RunResult run_experiment(const RunConfig& c, const RunOptions& opt);

// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace gfold::cli
