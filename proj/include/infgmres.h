/* SPDX-License-Identifier: Apache-2.0 */
#ifndef INFGMRES_H
#define INFGMRES_H

/*
 * C interface to the parameterized linear-system solver. The library
 * approximates x(mu) in A(mu) x(mu) = b for many mu from one Krylov basis,
 * built by inexact infinite GMRES on a companion-linearized, right-
 * preconditioned formulation with dynamically relaxed inner solves.
 *
 * All objects are opaque handles; every function returns a status code and
 * the last error message is retrievable per thread via ig_last_error().
 */

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ig_status {
  IG_OK = 0,
  IG_ERROR = 1,         /* invalid input, I/O failure, numerical failure */
  IG_NOT_CONVERGED = 2, /* solve finished without meeting its target */
} ig_status;

typedef struct ig_problem ig_problem;
typedef struct ig_solution ig_solution;

/* Message describing the most recent failure on this thread. */
const char* ig_last_error(void);

/* ------------------------------------------------------------------ */
/* Problems                                                            */

/* Time-delay transfer-function family -mu*I + A0 + A1*exp(-mu) with seeded
 * random banded A0, A1 and a seeded unit right-hand side. */
ig_status ig_problem_delay(int32_t n, int32_t bandwidth, uint64_t seed,
                           ig_problem** out);

/* Finite-difference Helmholtz-type family on the unit square. */
ig_status ig_problem_helmholtz(int32_t grid_points_per_side, double alpha,
                               ig_problem** out);

/* JSON manifest: {n, terms: [{matrix_path, function}], scale, rhs_path?}. */
ig_status ig_problem_from_manifest(const char* path, ig_problem** out);

ig_status ig_problem_dim(const ig_problem* p, int64_t* n);

/* Copies the problem's right-hand side into b (length n). */
ig_status ig_problem_rhs(const ig_problem* p, double* b, int64_t len);

void ig_problem_free(ig_problem* p);

/* ------------------------------------------------------------------ */
/* Solving                                                             */

/* config_json is the solver section of the run configuration, e.g.
 *   {"j_max": 40, "eps": 1e-10, "mu_ref": 0.2, "scale": 1.0,
 *    "ell_policy": "fixed", "stop_rel_res": 1e-8,
 *    "inner": {"kind": "bicgstab", "max_it": 10000}}
 * Returns IG_NOT_CONVERGED when stop_rel_res was set but not reached. */
ig_status ig_solve(const ig_problem* p, const char* config_json,
                   ig_solution** out);

/* ------------------------------------------------------------------ */
/* Solutions                                                           */

ig_status ig_solution_dim(const ig_solution* s, int64_t* n);
ig_status ig_solution_iterations(const ig_solution* s, int32_t* j);

/* Evaluates x(mu) into x (length n). */
ig_status ig_solution_evaluate(const ig_solution* s, double mu, double* x,
                               int64_t len);

/* |A(mu) x(mu) - b| / |b| against the problem's closed form. */
ig_status ig_solution_residual(const ig_solution* s, const ig_problem* p,
                               double mu, double* rel_res);

ig_status ig_solution_save(const ig_solution* s, const char* path);
ig_status ig_solution_load(const char* path, ig_solution** out);

void ig_solution_free(ig_solution* s);

/* ------------------------------------------------------------------ */
/* Command-level drivers (the CLI maps onto these)                     */

/* Reads a full run-config JSON file (problem + solver sections); writes
 * trace.csv, solution.json and summary.json into out_dir. */
ig_status ig_cmd_solve(const char* config_path, const char* out_dir);

/* Evaluates a saved solution over "a:step:b" or "v1,v2,..." parameters and
 * writes a "mu,rel_res" CSV. */
ig_status ig_cmd_sweep(const char* solution_path, const char* mu_spec,
                       const char* out_csv);

/* Packaged experiment by name; writes curves and assertions.json. Returns
 * IG_NOT_CONVERGED when the experiment's assertions fail. */
ig_status ig_cmd_experiment(const char* name, const char* out_dir);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* INFGMRES_H */
