#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>

#include "plasmodicke/errors.hpp"
#include "plasmodicke/scenario.hpp"

namespace {

// A path that exists wins over a preset of the same name.
plasmodicke::Scenario load_scenario(const std::string& source) {
  if (std::filesystem::exists(source)) return plasmodicke::parse_config(source);
  return plasmodicke::preset(source);
}

void report(const plasmodicke::RunManifest& manifest) {
  std::printf("wrote %s (%zu files)\n", manifest.directory.c_str(), manifest.files.size() + 1);
  for (const auto& file : manifest.files)
    std::printf("  %-22s %s\n", file.path.c_str(), file.digest.c_str());
  std::printf("  %-22s (file list)\n", "manifest.json");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"collective decay of two-level emitters near a Drude metal nanosphere"};
  app.require_subcommand(1);

  std::string run_source;
  std::string run_out;
  int run_modes = 0;
  int run_threads = 0;
  CLI::App* run = app.add_subcommand("run", "run a config file or a built-in preset");
  run->add_option("config", run_source, "config file path or preset name (path wins)")
      ->required();
  run->add_option("--out", run_out, "output directory (default out/<name>)");
  run->add_option("--modes", run_modes, "override controls.max_multipole")
      ->check(CLI::PositiveNumber);
  run->add_option("--threads", run_threads, "worker threads for sweep points")
      ->check(CLI::PositiveNumber);

  std::string sweep_source;
  std::string sweep_param;
  std::string sweep_out;
  double sweep_from = 0.0;
  double sweep_to = 0.0;
  int sweep_steps = 0;
  int sweep_threads = 0;
  CLI::App* sweep = app.add_subcommand("sweep", "sweep one numeric config parameter");
  sweep->add_option("config", sweep_source, "config file path or preset name (path wins)")
      ->required();
  sweep->add_option("--param", sweep_param, "dotted path, e.g. emitters.theta_deg")->required();
  sweep->add_option("--from", sweep_from, "first parameter value")->required();
  sweep->add_option("--to", sweep_to, "last parameter value")->required();
  sweep->add_option("--steps", sweep_steps, "number of points")
      ->required()
      ->check(CLI::PositiveNumber);
  sweep->add_option("--out", sweep_out, "output directory (default out/<name>)");
  sweep->add_option("--threads", sweep_threads, "worker threads for sweep points")
      ->check(CLI::PositiveNumber);

  CLI::App* presets = app.add_subcommand("presets", "list built-in scenarios");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (presets->parsed()) {
      for (const auto& name : plasmodicke::preset_names())
        std::printf("%-22s %s\n", name.c_str(), plasmodicke::preset_summary(name).c_str());
      return 0;
    }
    if (run->parsed()) {
      plasmodicke::Scenario s = load_scenario(run_source);
      if (!run_out.empty()) s.out_dir = run_out;
      if (run_modes > 0) s.controls.max_multipole = run_modes;
      if (run_threads > 0) s.threads = run_threads;
      report(plasmodicke::run_scenario(s));
      return 0;
    }
    plasmodicke::Scenario s = load_scenario(sweep_source);
    s.tasks = {"sweep"};
    plasmodicke::SweepSpec spec;
    spec.param = sweep_param;
    spec.from = sweep_from;
    spec.to = sweep_to;
    spec.steps = sweep_steps;
    s.sweep = spec;
    if (!sweep_out.empty()) s.out_dir = sweep_out;
    if (sweep_threads > 0) s.threads = sweep_threads;
    report(plasmodicke::run_scenario(s));
    return 0;
  } catch (const plasmodicke::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const plasmodicke::invariant_error& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return 3;
  } catch (const plasmodicke::convergence_error& e) {
    std::cerr << "convergence failure: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
