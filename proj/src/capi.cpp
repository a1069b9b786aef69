// SPDX-License-Identifier: Apache-2.0
#include "infgmres.h"

#include <nlohmann/json.hpp>

#include <cstring>
#include <string>

#include "engine.hpp"
#include "problem_gallery.hpp"
#include "run_io.hpp"

using nlohmann::json;

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

template <typename Fn>
ig_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    set_error(e.what());
    return IG_ERROR;
  } catch (...) {
    set_error("unknown error");
    return IG_ERROR;
  }
}

ig_status invalid(const char* what) {
  set_error(std::string("invalid argument: ") + what);
  return IG_ERROR;
}

}  // namespace

struct ig_problem {
  igm::TaylorMatrixFunction family;
  igm::Vec b;
  std::string descriptor_json;
};

struct ig_solution {
  igm::ParameterizedSolution sol;
};

extern "C" {

const char* ig_last_error(void) { return g_last_error.c_str(); }

ig_status ig_problem_delay(int32_t n, int32_t bandwidth, uint64_t seed,
                           ig_problem** out) {
  if (!out) return invalid("out is null");
  return guarded([&]() -> ig_status {
    auto d = igm::gallery::time_delay(n, bandwidth, seed);
    json desc = {{"kind", "delay"}, {"n", n}, {"bandwidth", bandwidth}, {"seed", seed}};
    *out = new ig_problem{std::move(d.family), std::move(d.b), desc.dump()};
    return IG_OK;
  });
}

ig_status ig_problem_helmholtz(int32_t grid, double alpha, ig_problem** out) {
  if (!out) return invalid("out is null");
  return guarded([&]() -> ig_status {
    auto h = igm::gallery::helmholtz_fd(grid, alpha);
    json desc = {{"kind", "helmholtz"}, {"grid", grid}, {"alpha", alpha}};
    *out = new ig_problem{std::move(h.family), std::move(h.b), desc.dump()};
    return IG_OK;
  });
}

ig_status ig_problem_from_manifest(const char* path, ig_problem** out) {
  if (!out || !path) return invalid("null pointer");
  return guarded([&]() -> ig_status {
    auto [family, b] = igm::gallery::from_manifest(path);
    json desc = {{"kind", "manifest"}, {"path", path}};
    *out = new ig_problem{std::move(family), std::move(b), desc.dump()};
    return IG_OK;
  });
}

ig_status ig_problem_dim(const ig_problem* p, int64_t* n) {
  if (!p || !n) return invalid("null pointer");
  *n = static_cast<int64_t>(p->family.dim());
  return IG_OK;
}

ig_status ig_problem_rhs(const ig_problem* p, double* b, int64_t len) {
  if (!p || !b) return invalid("null pointer");
  if (len < p->family.dim()) return invalid("buffer too small");
  std::memcpy(b, p->b.data(), sizeof(double) * static_cast<size_t>(p->b.size()));
  return IG_OK;
}

void ig_problem_free(ig_problem* p) { delete p; }

ig_status ig_solve(const ig_problem* p, const char* config_json, ig_solution** out) {
  if (!p || !config_json || !out) return invalid("null pointer");
  return guarded([&]() -> ig_status {
    double scale = 1.0;
    const igm::SolverConfig cfg = igm::runio::parse_solver_config(config_json, &scale);
    const igm::TaylorMatrixFunction family =
        scale == 1.0 ? p->family : p->family.rescaled(scale);
    igm::RunResult rr = cfg.ell_policy == igm::SolverConfig::EllPolicy::StrictTwoPass
                            ? igm::run_two_pass(family, p->b, cfg)
                            : igm::run(family, p->b, cfg);
    rr.solution.problem_json = p->descriptor_json;
    rr.solution.rhs = p->b;
    *out = new ig_solution{std::move(rr.solution)};
    if (!rr.converged) {
      set_error("solve finished without reaching stop_rel_res");
      return IG_NOT_CONVERGED;
    }
    return IG_OK;
  });
}

ig_status ig_solution_dim(const ig_solution* s, int64_t* n) {
  if (!s || !n) return invalid("null pointer");
  *n = static_cast<int64_t>(s->sol.dim());
  return IG_OK;
}

ig_status ig_solution_iterations(const ig_solution* s, int32_t* j) {
  if (!s || !j) return invalid("null pointer");
  *j = s->sol.iterations();
  return IG_OK;
}

ig_status ig_solution_evaluate(const ig_solution* s, double mu, double* x,
                               int64_t len) {
  if (!s || !x) return invalid("null pointer");
  if (len < s->sol.dim()) return invalid("buffer too small");
  return guarded([&]() -> ig_status {
    const igm::Vec v = s->sol.evaluate(mu);
    std::memcpy(x, v.data(), sizeof(double) * static_cast<size_t>(v.size()));
    return IG_OK;
  });
}

ig_status ig_solution_residual(const ig_solution* s, const ig_problem* p, double mu,
                               double* rel_res) {
  if (!s || !p || !rel_res) return invalid("null pointer");
  return guarded([&]() -> ig_status {
    *rel_res = s->sol.true_relative_residual(mu, p->family, p->b);
    return IG_OK;
  });
}

ig_status ig_solution_save(const ig_solution* s, const char* path) {
  if (!s || !path) return invalid("null pointer");
  return guarded([&]() -> ig_status {
    s->sol.save(path);
    return IG_OK;
  });
}

ig_status ig_solution_load(const char* path, ig_solution** out) {
  if (!path || !out) return invalid("null pointer");
  return guarded([&]() -> ig_status {
    *out = new ig_solution{igm::ParameterizedSolution::load(path)};
    return IG_OK;
  });
}

void ig_solution_free(ig_solution* s) { delete s; }

ig_status ig_cmd_solve(const char* config_path, const char* out_dir) {
  if (!config_path || !out_dir) return invalid("null pointer");
  const auto outcome = igm::runio::cmd_solve(config_path, out_dir);
  if (outcome.exit_code == 0) return IG_OK;
  set_error(outcome.error.empty() ? "solve did not converge" : outcome.error);
  return outcome.exit_code == 2 ? IG_NOT_CONVERGED : IG_ERROR;
}

ig_status ig_cmd_sweep(const char* solution_path, const char* mu_spec,
                       const char* out_csv) {
  if (!solution_path || !mu_spec || !out_csv) return invalid("null pointer");
  std::string err;
  const int rc = igm::runio::cmd_sweep(solution_path, mu_spec, out_csv, err, nullptr);
  if (rc == 0) return IG_OK;
  set_error(err);
  return IG_ERROR;
}

ig_status ig_cmd_experiment(const char* name, const char* out_dir) {
  if (!name || !out_dir) return invalid("null pointer");
  std::string err;
  const int rc = igm::runio::cmd_experiment(name, out_dir, err);
  if (rc == 0) return IG_OK;
  set_error(err);
  return rc == 2 ? IG_NOT_CONVERGED : IG_ERROR;
}

}  // extern "C"
