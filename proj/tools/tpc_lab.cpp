// Command-line entry point: one experiment per invocation.
//
//   tpc_lab <experiment> --config <path> [--seed N] [--out DIR]
//
// Exit status: 0 all checks pass, 1 a named check failed, 2 config error.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "tpc/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Two-point concavity laboratory"};
  std::string experiment, config_path, out_dir = ".";
  std::optional<std::uint64_t> seed;
  bool quiet = false;
  app.add_option("experiment", experiment, "Experiment to run")
      ->required()
      ->check(CLI::IsMember(tpc::cli::experiments()));
  app.add_option("--config", config_path, "Config file (TOML subset)")->required();
  app.add_option("--seed", seed, "Override the config seed");
  app.add_option("--out", out_dir, "Output directory for report.json and CSV files");
  app.add_flag("-q,--quiet", quiet, "Suppress the summary table");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : tpc::cli::kExitConfig;
  }

  nlohmann::json config;
  try {
    config = tpc::parse_config_file(config_path);
  } catch (const tpc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return tpc::cli::kExitConfig;
  }

  const auto res = tpc::cli::run(experiment, config, seed, out_dir);
  if (res.exit_code == tpc::cli::kExitConfig) {
    std::cerr << "config error: " << res.error << '\n';
    return res.exit_code;
  }
  if (!res.error.empty()) {
    std::cerr << "run failed: " << res.error << '\n';
    return res.exit_code;
  }
  if (!quiet) std::cout << tpc::cli::summary(res.report);
  for (const auto& name : res.report["failed_checks"]) std::cerr << "tolerance failure: " << name.get<std::string>() << '\n';
  return res.exit_code;
}
