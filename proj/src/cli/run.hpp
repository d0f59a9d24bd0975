#pragma once

#include <filesystem>
#include <string>

#include "cli/config.hpp"

namespace tdlab::cli {

/// Hex SHA-256 digest of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// Runs the configured scenario and writes its artifacts into `out_dir`:
/// CSV tables and grids, report.json with every metric, timings.json
/// (wall-clock seconds, excluded from the manifest) and manifest.json with the
/// SHA-256 of every other artifact. Module errors propagate with the
/// scenario name prepended.
void run_scenario(const ScenarioConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace tdlab::cli
