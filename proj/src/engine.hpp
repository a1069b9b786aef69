// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "block_vector.hpp"
#include "companion.hpp"
#include "inner_solvers.hpp"
#include "param_solution.hpp"
#include "taylor_model.hpp"

namespace igm {

struct SolverConfig {
  int j_max = 30;
  double eps = 1e-10;

  /// Inner-budget policy: eps_inner^(i) = ell * eps / |r~_{i-1}| with a fixed
  /// ell (default 1), or the strict sigma_j/j factor supplied by a prior
  /// exact pass (see run_two_pass).
  enum class EllPolicy { Fixed, StrictTwoPass };
  EllPolicy ell_policy = EllPolicy::Fixed;
  double ell = 1.0;
  double sigma_over_j = 0.0;  // strict policy factor, set by run_two_pass

  /// Reference parameter for the stopping criterion, in the original
  /// parameterization; evaluations at smaller |mu| inherit validity.
  double mu_ref = 0.0;

  double stop_rel_res = 0.0;  // early exit on |r~_i|/|b| below this; <=0 off

  enum class Reorth { Twice, Dgks };
  Reorth reorth = Reorth::Twice;
  double dgks_eta = 0.7071067811865476;

  InnerConfig inner;

  bool keep_full_ztilde = false;
  bool keep_inner_residuals = true;

  void validate() const;
};

/// One row per outer iteration; append-only and complete for i = 1..j.
struct TraceRow {
  int iter = 0;
  double rel_res_exact = 0.0;  // |r~_i| / |b| at mu_ref
  double eps_inner = 0.0;
  double p_norm = 0.0;
  int inner_iters = 0;
  double elapsed_s = 0.0;
};

struct RunTrace {
  std::vector<TraceRow> rows;
  static constexpr const char* csv_header =
      "iter,rel_res_exact,eps_inner,p_norm,inner_iters,elapsed_s";
  void write_csv(std::ostream& out) const;
  void write_csv(const std::string& path) const;
};

struct InnerSolveReport {
  int iteration = 0;
  double eps_inner = 0.0;
  double p_norm = 0.0;  // exact value recomputed from A0 w - rhs
  int inner_iterations = 0;
  std::string kind;
};

/// Basis and bookkeeping of one run. Column i of Q and Ztilde has exactly i
/// active blocks; H is (j+1) x j with nothing stored below the first
/// subdiagonal.
struct KrylovFactorization {
  Index n = 0;
  double c_norm = 0.0;
  int j = 0;
  std::vector<BlockVector> q;       // j+1 columns (j on lucky breakdown)
  std::vector<BlockVector> ztilde;  // full columns when kept
  Mat q_first;                      // n x (j+1) first-block rows of Q
  Mat z_first;                      // n x j first-block rows of Ztilde
  Mat p_first;                      // n x j inner-residual first blocks
  Mat h;                            // (j+1) x j
  std::vector<InnerSolveReport> reports;
  bool lucky_breakdown = false;

  /// |r~_i| at the given (already rescaled) parameter; i=0 gives |b|.
  double exact_residual_norm(double nu, int i = -1) const;
  /// delta_i = |P_i w_i(nu)|, the contamination from inexact inner solves.
  double delta_norm(double nu, int i = -1) const;
  /// |r_i| = |r~_i - P_i w_i| in the companion space, m-independent.
  double companion_residual_norm(double nu, int i = -1) const;
  /// Largest off-diagonal entry of Q^T Q (orthogonality diagnostic).
  double max_offdiag_gram() const;
};

struct RunResult {
  ParameterizedSolution solution;
  KrylovFactorization fact;
  RunTrace trace;
  bool converged = false;
  std::string stop_reason;
  double strict_sigma = 0.0;  // sigma_j from pass one (two-pass runs only)
};

/// Inner budget for iteration i given |r~_{i-1}|; r~_0 = |b|.
double eps_inner_value(double r_prev_norm, const SolverConfig& cfg);

struct OrthoResult {
  Vec h;
  double beta = 0.0;
  BlockVector q_new;
  bool breakdown = false;
};

/// Classical Gram-Schmidt against the columns of q, repeated once
/// unconditionally (Twice) or when the DGKS test fires; h accumulates both
/// passes. beta = 0 signals lucky breakdown.
OrthoResult orthogonalize(BlockVector y, const std::vector<BlockVector>& q,
                          SolverConfig::Reorth reorth, double eta);

/// The outer loop: structured matvec, re-orthogonalization, dynamic inner
/// budgets, and exact-residual tracking at mu_ref.
RunResult run(const TaylorMatrixFunction& f, const Vec& b, const SolverConfig& cfg);
RunResult run(const TaylorMatrixFunction& f, const Vec& b, const SolverConfig& cfg,
              InnerSolver& inner);

/// Strict-policy protocol: an exact pass fixes H and sigma_j, then the
/// configured inner solver reruns with eps_inner^(i) = (sigma_j/j) eps/|r~_{i-1}|.
RunResult run_two_pass(const TaylorMatrixFunction& f, const Vec& b,
                       const SolverConfig& cfg);

}  // namespace igm
