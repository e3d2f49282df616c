// Command-line front end: run, sweep and verify federated minimax experiments.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fedminimax/experiment.hpp"

namespace fm = fedminimax;

namespace {

// Loads a config file, mapping failures to the documented exit codes.
std::optional<fm::ExperimentConfig> load(const std::string& path, int& status) {
  try {
    return fm::load_config(path);
  } catch (const fm::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    status = fm::kExitIo;
  } catch (const fm::ConfigErrors& e) {
    std::cerr << "error: " << path << ": " << e.what() << "\n";
    status = fm::kExitUsage;
  }
  return std::nullopt;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated minimax optimization lab"};
  app.require_subcommand(1);

  std::string config_path, out_dir, axes, trace_path;
  std::optional<std::uint64_t> seed;

  auto* run = app.add_subcommand("run", "Run one experiment (every configured seed)");
  run->add_option("--config", config_path, "Configuration file (JSON)")->required();
  run->add_option("--out", out_dir, "Output directory (default: config output, then $FEDMINIMAX_OUT, then .)");
  run->add_option("--seed", seed, "Run this seed instead of the configured seeds");

  auto* sweep = app.add_subcommand("sweep", "Run a grid of experiments and write a summary table");
  sweep->add_option("--config", config_path, "Base configuration file (JSON)")->required();
  sweep->add_option("--axes", axes, "Grid, e.g. 'algorithm=nsgda-m,muon-da;seed=1,2,3'")->required();
  sweep->add_option("--out", out_dir, "Output directory")->required();

  auto* verify = app.add_subcommand("verify", "Check a trace CSV against the algorithm's invariants");
  verify->add_option("--trace", trace_path, "Trace CSV file")->required();
  verify->add_option("--config", config_path, "Configuration the trace was produced with")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? fm::kExitOk : fm::kExitUsage;
  }

  int status = fm::kExitOk;
  auto config = load(config_path, status);
  if (!config) return status;

  try {
    if (*run) {
      if (seed) config->seeds = {*seed};
      const auto dir = fm::resolve_output_dir(out_dir.empty() ? std::nullopt : std::optional(out_dir), *config);
      return fm::cmd_run(*config, dir, std::cout, std::cerr);
    }
    if (*sweep) return fm::cmd_sweep(*config, axes, out_dir, std::cout, std::cerr);
    return fm::cmd_verify(trace_path, *config, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return fm::kExitUsage;
  }
}
