// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end. Talks to the solver exclusively through the public
// C interface in infgmres.h.

#include <CLI11.hpp>

#include <cstdio>

#include "infgmres.h"

int main(int argc, char** argv) {
  CLI::App app{"Parameterized linear-system solver (one Krylov basis, many mu)"};
  app.require_subcommand(1);

  std::string config_path, out_dir, solution_path, mu_spec, out_csv, name;

  auto* solve = app.add_subcommand("solve", "Run a solve from a config file");
  solve->add_option("--config", config_path, "Run-config JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  solve->add_option("--out", out_dir, "Output directory")->required();

  auto* sweep = app.add_subcommand("sweep", "Evaluate a saved solution over mu");
  sweep->add_option("--solution", solution_path, "Solution container")
      ->required()
      ->check(CLI::ExistingFile);
  sweep->add_option("--mu", mu_spec, "Comma list or a:step:b range")->required();
  sweep->add_option("--out", out_csv, "Output CSV path")->required();

  auto* experiment = app.add_subcommand("experiment", "Run a packaged experiment");
  experiment->add_option("--name", name, "Experiment identifier")->required();
  experiment->add_option("--out", out_dir, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  ig_status rc = IG_ERROR;
  if (solve->parsed())
    rc = ig_cmd_solve(config_path.c_str(), out_dir.c_str());
  else if (sweep->parsed())
    rc = ig_cmd_sweep(solution_path.c_str(), mu_spec.c_str(), out_csv.c_str());
  else if (experiment->parsed())
    rc = ig_cmd_experiment(name.c_str(), out_dir.c_str());

  if (rc != IG_OK) std::fprintf(stderr, "error: %s\n", ig_last_error());
  return static_cast<int>(rc);
}
