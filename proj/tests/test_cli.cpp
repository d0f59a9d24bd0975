#include <filesystem>
#include <fstream>
#include <string>

#include <unistd.h>

#include "cli/config.hpp"
#include "cli/run.hpp"
#include "doctest.h"
#include "json.hpp"
#include "tdlab/errors.hpp"

using namespace tdlab;
using namespace tdlab::cli;
namespace fs = std::filesystem;

namespace {

// Scratch directory holding a unit-square domain file, removed on exit.
struct Scratch {
  fs::path dir;

  Scratch() : dir(fs::temp_directory_path() / ("tdlab_cli_test_" + std::to_string(::getpid()))) {
    fs::create_directories(dir);
    write("square.json", R"({"type": "polygon", "vertices": [[0,0],[1,0],[1,1],[0,1]]})");
  }
  ~Scratch() { fs::remove_all(dir); }

  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(dir / name) << text;
    return dir / name;
  }
  ScenarioConfig parse(const std::string& text, const std::string& scenario) const {
    return parse_config(text, scenario, dir.string());
  }
};

std::string error_of(const Scratch& s, const std::string& text, const std::string& scenario) {
  try {
    s.parse(text, scenario);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  return nlohmann::json::parse(in);
}

}  // namespace

TEST_CASE("valid configuration") {
  const Scratch s;
  const ScenarioConfig cfg = s.parse(R"({
    "scenario": "estimate", "domain": "square.json", "grid": {"resolution": 64},
    "p": [1, 2, "inf"], "estimate": {"radius": 0.25, "spacing": 0.05}, "seed": 3})",
                                     "estimate");
  CHECK(cfg.scenario == Scenario::kEstimate);
  CHECK(cfg.resolution == 64);
  CHECK(cfg.h() == doctest::Approx(1.0 / 64.0));
  REQUIRE(cfg.p_list.size() == 3);
  CHECK(cfg.p_list[2] == kInfinity);
  CHECK(cfg.seed.value() == 3);
  CHECK(cfg.estimate.spacing == 0.05);
  CHECK(fs::path(cfg.domain_path) == (s.dir / "square.json").lexically_normal());
}

TEST_CASE("configuration errors name the field") {
  const Scratch s;
  CHECK(error_of(s, R"({"domain": "square.json"})", "density").find("grid: missing required field") !=
        std::string::npos);
  CHECK(error_of(s, R"({"domain": "square.json", "grid": {"resolution": 4}})", "density").find("grid.resolution") !=
        std::string::npos);
  CHECK(error_of(s, R"({"domain": "square.json", "grid": {"resolution": 64, "cells": 2}})", "density")
            .find("grid.cells: unknown key") != std::string::npos);
  CHECK(error_of(s, R"({"domain": "square.json", "grid": {"resolution": 64}, "colour": 1})", "density")
            .find("colour: unknown key") != std::string::npos);
  CHECK(error_of(s, R"({"domain": "square.json", "grid": {"resolution": 64}, "p": [0.5]})", "estimate")
            .find("p[0]") != std::string::npos);
  CHECK(error_of(s, R"({"grid": {"resolution": 64}, "source": {"value": 1}})", "counterexample")
            .find("not used by the counterexample scenario") != std::string::npos);
  CHECK(error_of(s, R"({"domain": "missing.json", "grid": {"resolution": 64}})", "density").find("domain") !=
        std::string::npos);
  CHECK(error_of(s, R"({"scenario": "beckmann", "domain": "square.json", "grid": {"resolution": 64}})", "density")
            .find("scenario") != std::string::npos);
  CHECK(error_of(s, "{\n  \"grid\": {\"resolution\": 64,}\n}", "counterexample").find("config:2:") !=
        std::string::npos);
  CHECK_THROWS_AS(parse_scenario("wander"), ConfigError);
}

TEST_CASE("domain files") {
  const Domain poly = parse_domain(R"({"type": "polygon", "vertices": [[0,0],[1,0],[0,1]]})", "tri");
  CHECK(poly.is_polygon());
  const Domain approx =
      parse_domain(R"({"type": "round_approximation", "polygon": [[0,0],[1,0],[1,1],[0,1]], "radius": 0.5,
                       "spacing": 0.25})",
                   "approx");
  CHECK(!approx.is_polygon());
  const Domain round =
      parse_domain(R"({"type": "round", "radius": 1.05, "centers": [[0,0],[2,0],[2,2],[0,2]]})", "round");
  CHECK(round.face_count() == 4);
  CHECK_THROWS_AS(parse_domain(R"({"type": "polygon", "vertices": [[0,0],[0,1],[1,0]]})", "cw"), ConfigError);
  CHECK_THROWS_AS(parse_domain(R"({"type": "blob"})", "blob"), ConfigError);
}

TEST_CASE("sha256_file") {
  const Scratch s;
  CHECK(sha256_file(s.write("abc.txt", "abc")) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("estimate run reports ratios below the constants") {
  const Scratch s;
  const fs::path config = s.write("estimate.json", R"({
    "domain": "square.json", "grid": {"resolution": 32}, "p": [1, 2, "inf"],
    "estimate": {"radius": 0.25, "spacing": 0.1}, "seed": 7})");
  const ScenarioConfig cfg = load_config(config.string(), "estimate");
  run_scenario(cfg, s.dir / "out");
  const nlohmann::json report = read_json(s.dir / "out" / "report.json");
  REQUIRE(report["estimates"].size() == 3);
  for (const auto& row : report["estimates"]) {
    CHECK(row["holds"].get<bool>());
    CHECK(row.contains("sigma_norm"));
    CHECK(row.contains("lp_constant"));
  }
  CHECK(report["estimates"][2]["p"] == "inf");
}

TEST_CASE("deterministic runs reproduce the manifest") {
  const Scratch s;
  const fs::path config = s.write("project.json", R"({
    "domain": "square.json", "grid": {"resolution": 32}, "project": {"bin_width": 0.05}, "seed": 7})");
  ScenarioConfig cfg = load_config(config.string(), "project");
  cfg.deterministic = true;
  run_scenario(cfg, s.dir / "a");
  run_scenario(cfg, s.dir / "b");
  const nlohmann::json a = read_json(s.dir / "a" / "manifest.json");
  const nlohmann::json b = read_json(s.dir / "b" / "manifest.json");
  CHECK(a == b);
  CHECK(a["artifacts"].size() >= 2);
  for (const auto& entry : a["artifacts"]) CHECK(entry["path"] != "timings.json");

  cfg.seed.reset();
  CHECK_THROWS_AS(run_scenario(cfg, s.dir / "c"), ConfigError);
}

TEST_CASE("module errors carry the scenario name") {
  const Scratch s;
  const fs::path config = s.write("density.json", R"({
    "domain": "square.json", "grid": {"resolution": 16},
    "source": {"polygon": [[0.5,0.5],[1.5,0.5],[1.5,1.5],[0.5,1.5]]}})");
  try {
    run_scenario(load_config(config.string(), "density"), s.dir / "out");
    FAIL("expected an error");
  } catch (const ConfigError&) {
    FAIL("module errors are not configuration errors");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("scenario density: ") == 0);
  }

  s.write("round.json", R"({"type": "round", "radius": 1.05, "centers": [[0,0],[2,0],[2,2],[0,2]]})");
  const fs::path polygon_only = s.write("estimate.json", R"({"domain": "round.json", "grid": {"resolution": 16}})");
  CHECK_THROWS_AS(run_scenario(load_config(polygon_only.string(), "estimate"), s.dir / "out2"), ConfigError);
}
