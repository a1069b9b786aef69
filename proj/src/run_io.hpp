// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <utility>
#include <vector>

#include "engine.hpp"
#include "linalg.hpp"
#include "taylor_model.hpp"

namespace igm::runio {

/// A problem instance plus the JSON descriptor it was built from (embedded in
/// saved solutions so sweeps can rebuild the closed form).
struct Problem {
  TaylorMatrixFunction family;
  Vec b;
  std::string descriptor_json;
};

/// Builds a problem from its descriptor: {"kind": "delay"|"helmholtz"|
/// "manifest", ...}. Relative manifest paths resolve against base_dir.
Problem load_problem(const std::string& descriptor_json, const std::string& base_dir);

/// Parses "a:step:b" ranges or comma-separated lists.
std::vector<double> parse_mu_spec(const std::string& spec);

/// Parses the solver section of a run-config JSON text; validation failures
/// name the offending field. The optional reparameterization factor is
/// returned separately (it applies to the problem, not the solver).
SolverConfig parse_solver_config(const std::string& config_json, double* scale_out);

struct SolveOutcome {
  int exit_code = 1;  // 0 converged, 2 not converged, 1 error
  bool converged = false;
  double final_rel_res = 0.0;
  int iterations = 0;
  double wall_s = 0.0;
  std::string error;
};

/// Runs a solve from a config file; writes trace.csv, solution.json and
/// summary.json into out_dir.
SolveOutcome cmd_solve(const std::string& config_path, const std::string& out_dir);

/// Evaluates a saved solution over a parameter list; writes "mu,rel_res" CSV.
/// Returns 0 on success, 1 on error; row count reported via rows_out.
int cmd_sweep(const std::string& solution_path, const std::string& mu_spec,
              const std::string& out_csv, std::string& error, int* rows_out);

/// Runs a packaged experiment; 0 pass, 2 assertion failures, 1 error.
int cmd_experiment(const std::string& name, const std::string& out_dir,
                   std::string& error);

}  // namespace igm::runio
