// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>
#include <vector>

namespace igm::experiments {

struct Assertion {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct ExperimentResult {
  std::string name;
  std::vector<Assertion> assertions;
  std::map<std::string, double> metrics;
  bool all_pass() const {
    for (const auto& a : assertions)
      if (!a.pass) return false;
    return true;
  }
};

/// Seeded time-delay runs under exactly-saturated random defects for a ladder
/// of outer budgets eps; emits plot-ready CSV curves (exact residual per mu,
/// inner budgets, contamination delta) when out_dir is nonempty.
ExperimentResult delay_perturbation(const std::string& out_dir);

/// Helmholtz-type grid study comparing exact LU preconditioning against
/// relaxed BiCGSTAB and the identity substitution, plus the cost comparison
/// against one fixed-tolerance solve.
ExperimentResult helmholtz_inexact(const std::string& out_dir);

/// Companion spectrum of the time-delay family and the residual bound built
/// from the (k+1)-th largest eigenvalue modulus.
ExperimentResult spectrum_bound(const std::string& out_dir);

std::vector<std::string> experiment_names();

/// Dispatch by name; writes plot-ready CSVs and assertions.json into out_dir
/// (when nonempty). Unknown names raise an error listing the valid ones.
ExperimentResult run_experiment(const std::string& name, const std::string& out_dir);

}  // namespace igm::experiments
