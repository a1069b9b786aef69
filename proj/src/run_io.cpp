// SPDX-License-Identifier: Apache-2.0
#include "run_io.hpp"

#include <nlohmann/json.hpp>

#include <cctype>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "engine.hpp"
#include "experiments.hpp"
#include "problem_gallery.hpp"

namespace igm::runio {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

[[noreturn]] void bad_field(const std::string& field, const std::string& why) {
  throw Error("config field '" + field + "': " + why);
}

template <typename T>
T get_field(const json& doc, const std::string& field, const T& fallback) {
  if (!doc.contains(field)) return fallback;
  try {
    return doc.at(field).get<T>();
  } catch (const json::exception&) {
    bad_field(field, "has the wrong type");
  }
}

template <typename T>
T need_field(const json& doc, const std::string& field) {
  if (!doc.contains(field)) bad_field(field, "is required");
  try {
    return doc.at(field).get<T>();
  } catch (const json::exception&) {
    bad_field(field, "has the wrong type");
  }
}

InnerConfig parse_inner(const json& doc) {
  InnerConfig inner;
  if (!doc.contains("inner")) return inner;
  const json& j = doc.at("inner");
  if (!j.is_object()) bad_field("inner", "must be an object");
  const std::string kind = get_field<std::string>(j, "kind", "lu");
  if (kind == "lu")
    inner.kind = InnerConfig::Kind::Lu;
  else if (kind == "bicgstab")
    inner.kind = InnerConfig::Kind::Bicgstab;
  else if (kind == "identity_then_bicgstab")
    inner.kind = InnerConfig::Kind::IdentityThenBicgstab;
  else if (kind == "perturbed")
    inner.kind = InnerConfig::Kind::Perturbed;
  else
    bad_field("inner.kind",
              "unknown value '" + kind +
                  "' (expected lu|bicgstab|identity_then_bicgstab|perturbed)");
  inner.max_it = get_field<int>(j, "max_it", inner.max_it);
  if (inner.max_it < 1) bad_field("inner.max_it", "must be at least 1");
  inner.seed = get_field<uint64_t>(j, "seed", inner.seed);
  inner.jacobi = get_field<bool>(j, "jacobi", inner.jacobi);
  inner.lagged_tol = get_field<bool>(j, "lagged_tol", inner.lagged_tol);
  inner.perturb_cap_rel =
      get_field<double>(j, "perturb_cap_rel", inner.perturb_cap_rel);
  if (inner.perturb_cap_rel <= 0.0)
    bad_field("inner.perturb_cap_rel", "must be positive");
  return inner;
}

SolverConfig parse_solver(const json& doc) {
  SolverConfig cfg;
  cfg.j_max = need_field<int>(doc, "j_max");
  cfg.eps = need_field<double>(doc, "eps");
  cfg.mu_ref = need_field<double>(doc, "mu_ref");
  cfg.ell = get_field<double>(doc, "ell", 1.0);
  const std::string policy = get_field<std::string>(doc, "ell_policy", "fixed");
  if (policy == "fixed")
    cfg.ell_policy = SolverConfig::EllPolicy::Fixed;
  else if (policy == "strict_two_pass")
    cfg.ell_policy = SolverConfig::EllPolicy::StrictTwoPass;
  else
    bad_field("ell_policy", "expected 'fixed' or 'strict_two_pass'");
  cfg.stop_rel_res = get_field<double>(doc, "stop_rel_res", 0.0);
  const std::string reorth = get_field<std::string>(doc, "reorth", "twice");
  if (reorth == "twice")
    cfg.reorth = SolverConfig::Reorth::Twice;
  else if (reorth == "dgks")
    cfg.reorth = SolverConfig::Reorth::Dgks;
  else
    bad_field("reorth", "expected 'twice' or 'dgks'");
  cfg.keep_full_ztilde = get_field<bool>(doc, "keep_full_ztilde", false);
  cfg.inner = parse_inner(doc);
  try {
    if (cfg.ell_policy == SolverConfig::EllPolicy::Fixed) cfg.validate();
  } catch (const Error& e) {
    throw Error("config: " + std::string(e.what()));
  }
  return cfg;
}

}  // namespace

SolverConfig parse_solver_config(const std::string& config_json, double* scale_out) {
  json doc;
  try {
    doc = json::parse(config_json);
  } catch (const json::exception& e) {
    throw Error(std::string("config is not valid JSON: ") + e.what());
  }
  if (scale_out) {
    *scale_out = get_field<double>(doc, "scale", 1.0);
    if (*scale_out <= 0.0) bad_field("scale", "must be positive");
  }
  return parse_solver(doc);
}

Problem load_problem(const std::string& descriptor_json, const std::string& base_dir) {
  json p;
  try {
    p = json::parse(descriptor_json);
  } catch (const json::exception& e) {
    throw Error(std::string("problem descriptor is not valid JSON: ") + e.what());
  }
  if (!p.is_object()) bad_field("problem", "must be an object");
  const std::string kind = need_field<std::string>(p, "kind");
  if (kind == "delay") {
    const int n = need_field<int>(p, "n");
    const int bandwidth = get_field<int>(p, "bandwidth", 5);
    const uint64_t seed = get_field<uint64_t>(p, "seed", 1);
    auto d = gallery::time_delay(n, bandwidth, seed);
    return Problem{std::move(d.family), std::move(d.b), p.dump()};
  }
  if (kind == "helmholtz") {
    const int grid = need_field<int>(p, "grid");
    const double alpha = get_field<double>(p, "alpha", 30.0);
    auto hp = gallery::helmholtz_fd(grid, alpha);
    return Problem{std::move(hp.family), std::move(hp.b), p.dump()};
  }
  if (kind == "manifest") {
    std::string path = need_field<std::string>(p, "path");
    fs::path fp(path);
    if (!fp.is_absolute() && !base_dir.empty()) fp = fs::path(base_dir) / fp;
    auto [family, b] = gallery::from_manifest(fp.string());
    json echoed = p;
    echoed["path"] = fs::absolute(fp).string();
    return Problem{std::move(family), std::move(b), echoed.dump()};
  }
  bad_field("problem.kind",
            "unknown value '" + kind + "' (expected delay|helmholtz|manifest)");
}

std::vector<double> parse_mu_spec(const std::string& spec) {
  require(!spec.empty(), "empty parameter specification");
  std::vector<double> mus;
  const auto parse_num = [](const std::string& s) {
    size_t used = 0;
    double v = 0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      throw Error("cannot parse parameter value '" + s + "'");
    }
    while (used < s.size() && std::isspace(static_cast<unsigned char>(s[used])))
      ++used;
    require(used == s.size(), "cannot parse parameter value '" + s + "'");
    return v;
  };

  if (spec.find(':') != std::string::npos) {
    // a:step:b inclusive range
    const size_t c1 = spec.find(':');
    const size_t c2 = spec.find(':', c1 + 1);
    require(c2 != std::string::npos && spec.find(':', c2 + 1) == std::string::npos,
            "range must have the form a:step:b");
    const double a = parse_num(spec.substr(0, c1));
    const double step = parse_num(spec.substr(c1 + 1, c2 - c1 - 1));
    const double b = parse_num(spec.substr(c2 + 1));
    require(step != 0.0, "range step must be nonzero");
    require((b - a) / step >= -1e-12, "range is empty");
    const long count = static_cast<long>(std::floor((b - a) / step + 1e-9)) + 1;
    for (long k = 0; k < count; ++k) mus.push_back(a + static_cast<double>(k) * step);
    return mus;
  }

  size_t pos = 0;
  while (pos <= spec.size()) {
    const size_t comma = spec.find(',', pos);
    const std::string tok =
        spec.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    require(!tok.empty(), "empty entry in parameter list");
    mus.push_back(parse_num(tok));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  require(!mus.empty(), "empty parameter list");
  return mus;
}

SolveOutcome cmd_solve(const std::string& config_path, const std::string& out_dir) {
  SolveOutcome out;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    std::ifstream in(config_path);
    if (!in) throw Error("cannot open config '" + config_path + "'");
    json doc;
    try {
      in >> doc;
    } catch (const json::exception& e) {
      throw Error("config '" + config_path + "' is not valid JSON: " + e.what());
    }
    if (!doc.contains("problem")) bad_field("problem", "is required");

    Problem problem = load_problem(doc.at("problem").dump(),
                                   fs::path(config_path).parent_path().string());
    const double scale = get_field<double>(doc, "scale", 1.0);
    if (scale <= 0.0) bad_field("scale", "must be positive");
    SolverConfig cfg = parse_solver(doc);

    const TaylorMatrixFunction family =
        scale == 1.0 ? std::move(problem.family) : problem.family.rescaled(scale);

    RunResult rr = cfg.ell_policy == SolverConfig::EllPolicy::StrictTwoPass
                       ? run_two_pass(family, problem.b, cfg)
                       : run(family, problem.b, cfg);

    fs::create_directories(out_dir);
    rr.trace.write_csv((fs::path(out_dir) / "trace.csv").string());

    rr.solution.problem_json = problem.descriptor_json;
    rr.solution.rhs = problem.b;
    rr.solution.save((fs::path(out_dir) / "solution.json").string());

    double final_rel = rr.trace.rows.back().rel_res_exact;
    double final_true = -1.0;
    if (family.has_evaluator()) {
      final_true =
          rr.solution.true_relative_residual(cfg.mu_ref, family, problem.b);
      final_rel = final_true;
    }
    out.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                     .count();

    json summary;
    summary["converged"] = rr.converged;
    summary["stop_reason"] = rr.stop_reason;
    summary["iterations"] = rr.fact.j;
    summary["final_rel_res"] = final_rel;
    summary["final_rel_res_exact"] = rr.trace.rows.back().rel_res_exact;
    if (final_true >= 0.0) summary["final_true_rel_res"] = final_true;
    summary["wall_s"] = out.wall_s;
    if (rr.strict_sigma > 0.0) summary["strict_sigma"] = rr.strict_sigma;
    summary["config"] = doc;
    std::ofstream sum(fs::path(out_dir) / "summary.json");
    if (!sum) throw Error("cannot write summary.json in '" + out_dir + "'");
    sum << summary.dump(2) << "\n";

    out.converged = rr.converged;
    out.final_rel_res = final_rel;
    out.iterations = rr.fact.j;
    out.exit_code = rr.converged ? 0 : 2;
  } catch (const std::exception& e) {
    out.error = e.what();
    out.exit_code = 1;
  }
  return out;
}

int cmd_sweep(const std::string& solution_path, const std::string& mu_spec,
              const std::string& out_csv, std::string& error, int* rows_out) {
  try {
    const ParameterizedSolution sol = ParameterizedSolution::load(solution_path);
    require(!sol.problem_json.empty(),
            "solution container lacks a problem descriptor; cannot rebuild A(mu)");
    require(sol.rhs.size() > 0, "solution container lacks the right-hand side");
    Problem problem =
        load_problem(sol.problem_json, fs::path(solution_path).parent_path().string());

    const std::vector<double> mus = parse_mu_spec(mu_spec);

    int threads = 0;
    if (const char* env = std::getenv("IG_SWEEP_THREADS")) threads = std::atoi(env);
    const auto rows = sol.sweep(mus, problem.family, sol.rhs, threads);

    std::ofstream out(out_csv);
    if (!out) throw Error("cannot open '" + out_csv + "' for writing");
    out.precision(17);
    out << "mu,rel_res\n";
    for (const auto& r : rows) {
      if (r.ok)
        out << r.mu << "," << r.rel_res << "\n";
      else
        out << r.mu << ",nan\n";
    }
    if (rows_out) *rows_out = static_cast<int>(rows.size());
    return 0;
  } catch (const std::exception& e) {
    error = e.what();
    return 1;
  }
}

int cmd_experiment(const std::string& name, const std::string& out_dir,
                   std::string& error) {
  try {
    const auto res = experiments::run_experiment(name, out_dir);
    if (res.all_pass()) return 0;
    error = "experiment assertions failed:";
    for (const auto& a : res.assertions)
      if (!a.pass) error += "\n  " + a.name + " (" + a.detail + ")";
    return 2;
  } catch (const std::exception& e) {
    error = e.what();
    return 1;
  }
}

}  // namespace igm::runio
