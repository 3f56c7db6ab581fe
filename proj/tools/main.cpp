#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dpmfg/cli_io.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Finite-state mean field games with hard constraints"};
  app.require_subcommand(1);

  std::string solve_config, compare_config, residuals_dir;
  auto* solve = app.add_subcommand("solve", "Run one algorithm and write the solution files");
  solve->add_option("--config", solve_config, "Run configuration (JSON)")->required();
  auto* compare = app.add_subcommand("compare", "Run all four algorithms on one instance");
  compare->add_option("--config", compare_config, "Run configuration without an algorithm (JSON)")->required();
  auto* residuals = app.add_subcommand("residuals", "Recompute residuals from a solution directory");
  residuals->add_option("--dir", residuals_dir, "Directory written by solve")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : dpmfg::kExitUsage;
  }

  try {
    if (*solve) return dpmfg::cmd_solve(dpmfg::load_run_config(solve_config));
    if (*compare) return dpmfg::cmd_compare(dpmfg::load_run_config(compare_config));
    return dpmfg::cmd_residuals(residuals_dir);
  } catch (const dpmfg::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return dpmfg::kExitUsage;
  }
}
