#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "lab/config.hpp"
#include "lab/error.hpp"
#include "lab/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Degenerate Dirichlet form laboratory"};
  app.require_subcommand(1, 1);
  std::string config_path;
  std::optional<std::string> out_dir;
  std::vector<std::string> sets;
  bool quiet = false;

  for (const auto& name : lab::experiment_names()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("--config", config_path, "JSON config file")->required();
    sub->add_option("--out", out_dir, "output directory (overrides output_dir)");
    sub->add_option("--set", sets, "override a config leaf: dotted.key=value")->take_all();
    sub->add_flag("--quiet", quiet, "suppress the per-check listing");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const std::string experiment = app.get_subcommands().front()->get_name();
  try {
    const lab::ExperimentConfig cfg = lab::load_config(experiment, config_path, sets, out_dir);
    const lab::RunReport report = lab::run_experiment(cfg);
    if (!quiet) std::cout << lab::to_text(report);
    std::fprintf(stderr, "%s: %zu checks, %s, wall_time=%.3fs, output in %s\n", experiment.c_str(),
                 report.checks.size(), report.passed() ? "passed" : "FAILED", report.wall_time,
                 cfg.output_dir.c_str());
    return lab::exit_code(report);
  } catch (const lab::Error& e) {
    std::fprintf(stderr, "error [%s]: %s\n", std::string(lab::to_string(e.code())).c_str(), e.what());
    return lab::exit_code(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
