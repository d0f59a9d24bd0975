#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "cli/config.hpp"
#include "cli/run.hpp"
#include "tdlab/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"tdlab: transport densities toward the domain boundary"};
  std::string scenario;
  std::string config_path;
  std::string out_dir;
  bool deterministic = false;
  app.add_option("scenario", scenario,
                 "project | symmetrize | density | beckmann | counterexample | estimate | approxstudy")
      ->required();
  app.add_option("--config", config_path, "JSON scenario configuration")->required()->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory (overrides the config's \"output\")");
  app.add_flag("--deterministic", deterministic, "serial, bit-reproducible accumulation");
  app.footer("Environment: TDLAB_WORKERS overrides the configured worker count.");
  CLI11_PARSE(app, argc, argv);

  try {
    tdlab::cli::ScenarioConfig cfg = tdlab::cli::load_config(config_path, scenario);
    if (deterministic) cfg.deterministic = true;
    if (!out_dir.empty()) cfg.output = out_dir;
    if (cfg.output.empty()) cfg.output = "out/" + scenario;
    tdlab::cli::run_scenario(cfg, cfg.output);
    std::cout << scenario << ": wrote " << std::filesystem::path(cfg.output) / "report.json" << '\n';
  } catch (const tdlab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
