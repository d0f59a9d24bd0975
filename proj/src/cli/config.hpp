#pragma once

// Scenario configuration: a JSON document validated field by field. Unknown
// keys, keys the selected scenario does not use, and malformed values are
// rejected with the dotted path of the offending field.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tdlab/geometry.hpp"
#include "tdlab/scenarios.hpp"

namespace tdlab::cli {

enum class Scenario { kProject, kSymmetrize, kDensity, kBeckmann, kCounterexample, kEstimate, kApproxStudy };

const char* to_string(Scenario s);
/// Throws ConfigError for unknown names.
Scenario parse_scenario(const std::string& name);

struct ProjectParams {
  std::optional<double> bin_width;  // default: the cell size
};

struct SymmetrizeParams {
  double jacobian_r = 1.0;
  double jacobian_L = 2.0;
  std::size_t jacobian_samples = 100000;
  std::size_t direct_samples = 20000;
};

struct DensityParams {
  std::size_t refinements = 1;  // extra halvings of the cell size
};

struct BeckmannParams {
  std::size_t max_iter = 200000;
  bool uniqueness = false;
};

struct EstimateParams {
  double radius = 0.25;
  double spacing = 0.05;
};

struct ApproxParams {
  double radius = 0.25;
  double spacing = 0.2;
  std::size_t halvings = 3;
};

struct ScenarioConfig {
  Scenario scenario = Scenario::kDensity;
  std::string config_path;
  std::string domain_path;  // resolved against the config's directory
  std::size_t resolution = 0;  // cells per unit length (h = 1 / resolution)
  std::size_t subdivision = 2;  // quadrature points per cell edge
  std::vector<double> p_list{1.0, 2.0, 4.0, kInfinity};
  double solver_tolerance = 1e-6;
  std::string output;
  bool deterministic = false;
  std::optional<std::uint64_t> seed;
  std::size_t workers = 0;  // 0: TDLAB_WORKERS or the hardware concurrency
  SourceSpec source;

  ProjectParams project;
  SymmetrizeParams symmetrize;
  DensityParams density;
  BeckmannParams beckmann;
  CounterexampleConfig counterexample;
  std::size_t counterexample_refinements = 2;
  EstimateParams estimate;
  ApproxParams approx;

  double h() const { return 1.0 / static_cast<double>(resolution); }
};

/// Parses and validates a configuration document. `scenario` comes from the
/// command line; a "scenario" key in the document must agree with it.
/// `base_dir` resolves relative paths. Throws ConfigError.
ScenarioConfig parse_config(const std::string& text, const std::string& scenario, const std::string& base_dir);

/// Reads `path` and calls parse_config with its directory as base.
ScenarioConfig load_config(const std::string& path, const std::string& scenario);

/// Domain file: {"type": "polygon", "vertices": [[x, y], ...]},
/// {"type": "round", "radius": r, "centers": [[x, y], ...]} or
/// {"type": "round_approximation", "polygon": [[x, y], ...], "radius": r, "spacing": s}.
/// Throws ConfigError naming the file and field.
Domain load_domain(const std::string& path);
Domain parse_domain(const std::string& text, const std::string& origin);

}  // namespace tdlab::cli
