// Scenario-driven front end: run flows, verify the Harnack theorems, and
// emit convergence sweeps.  Users are scripts and CI; everything is driven
// by a JSON config and exits with a stable code contract
// (0 ok, 2 validation, 3 numerical failure, 4 verification failure).

#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rham/app.hpp"

int main(int argc, char** argv) {
  CLI::App app{"rham: Ricci flow + differential Harnack verification lab"};
  app.require_subcommand(1);

  std::string config_path, out_dir, run_dir;
  std::vector<std::string> theorems;
  std::vector<std::size_t> resolutions;
  double tolerance = -1.0;

  auto* run = app.add_subcommand("run", "execute a scenario config");
  run->add_option("--config", config_path, "scenario config JSON")->required();
  run->add_option("--out", out_dir, "output directory (overrides config)");

  auto* verify = app.add_subcommand("verify", "verify theorems over a run");
  verify->add_option("run_dir", run_dir, "completed run directory")->required();
  verify->add_option("--theorem", theorems,
                     "theorem id (repeatable; default from config/equation)");
  verify->add_option("--tolerance", tolerance, "tolerance override");

  auto* sweep = app.add_subcommand("sweep", "convergence study over resolutions");
  sweep->add_option("--config", config_path, "scenario config JSON")->required();
  sweep->add_option("--resolutions", resolutions, "grid sizes (>= 2 values)")
      ->required();
  sweep->add_option("--out", out_dir, "output directory (overrides config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (run->parsed()) return rham::app::cmd_run(config_path, out_dir);
  if (verify->parsed()) {
    std::optional<double> tol;
    if (tolerance >= 0.0) tol = tolerance;
    return rham::app::cmd_verify(run_dir, theorems, tol);
  }
  if (sweep->parsed()) return rham::app::cmd_sweep(config_path, resolutions, out_dir);
  return 2;
}
