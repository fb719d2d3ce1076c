#pragma once

#include "config.hpp"
#include "experiments.hpp"

#include <string>

namespace gfold::cli {

std::string sha256_file(const std::string& path);

// Config echo, version, golden constants, wall time and hashed file list.
json build_manifest(const RunConfig& c, const RunOptions& opt, const RunResult& r, double wall_time);

// Writes run_manifest.json into the output directory; returns its path.
std::string write_manifest(const std::string& out_dir, const json& manifest);

}  // namespace gfold::cli
