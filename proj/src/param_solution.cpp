// SPDX-License-Identifier: Apache-2.0
#include "param_solution.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <future>
#include <thread>

#include "hessenberg_ls.hpp"

namespace igm {

using nlohmann::json;

ParameterizedSolution::ParameterizedSolution(Mat z_first, Mat h, double c_norm,
                                             double scale, double mu_ref,
                                             double eps, bool converged)
    : z_first_(std::move(z_first)),
      h_(std::move(h)),
      c_norm_(c_norm),
      scale_(scale),
      mu_ref_(mu_ref),
      eps_(eps),
      converged_(converged) {
  require(z_first_.cols() >= 1, "solution requires at least one iteration");
  require(h_.rows() == z_first_.cols() + 1 && h_.cols() == z_first_.cols(),
          "Hessenberg shape does not match basis width");
  require(scale_ > 0.0, "scale must be positive");
}

Vec ParameterizedSolution::evaluate_prefix(int i, double mu,
                                           bool* rank_deficient) const {
  require(i >= 1 && i <= iterations(), "prefix out of range");
  require(std::isfinite(mu), "mu must be finite");
  const HessLs ls = solve_shifted_ls(h_, i, mu / scale_, c_norm_);
  if (ls.rank_deficient && !rank_deficient)
    throw Error("least-squares rank deficiency at mu=" + std::to_string(mu));
  if (rank_deficient) *rank_deficient = ls.rank_deficient;
  return z_first_.leftCols(i) * ls.w;
}

Vec ParameterizedSolution::evaluate(double mu, bool* rank_deficient) const {
  return evaluate_prefix(iterations(), mu, rank_deficient);
}

double ParameterizedSolution::true_relative_residual(double mu,
                                                     const TaylorMatrixFunction& f,
                                                     const Vec& b) const {
  require(f.dim() == dim() && b.size() == dim(),
          "problem dimension does not match solution");
  const Vec x = evaluate(mu);
  const double bnorm = b.norm();
  require(bnorm > 0.0, "right-hand side is zero");
  return (f.eval(mu) * x - b).norm() / bnorm;
}

std::vector<ParameterizedSolution::SweepRow> ParameterizedSolution::sweep(
    const std::vector<double>& mus, const TaylorMatrixFunction& f, const Vec& b,
    int threads) const {
  require(!mus.empty(), "sweep requires at least one parameter value");
  std::vector<SweepRow> rows(mus.size());
  const auto eval_row = [&](size_t k) {
    rows[k].mu = mus[k];
    try {
      rows[k].rel_res = true_relative_residual(mus[k], f, b);
    } catch (const std::exception& e) {
      rows[k].ok = false;
      rows[k].error = e.what();
    }
  };

  if (threads <= 0) {
    const unsigned hw = std::thread::hardware_concurrency();
    threads = hw ? static_cast<int>(std::min<unsigned>(hw, 8)) : 1;
  }
  if (threads <= 1 || mus.size() < 4) {
    for (size_t k = 0; k < mus.size(); ++k) eval_row(k);
    return rows;
  }

  std::vector<std::future<void>> futures;
  const size_t stride =
      (mus.size() + static_cast<size_t>(threads) - 1) / static_cast<size_t>(threads);
  for (int t = 0; t < threads; ++t) {
    const size_t lo = static_cast<size_t>(t) * stride;
    if (lo >= mus.size()) break;
    const size_t hi = std::min(mus.size(), lo + stride);
    futures.push_back(std::async(std::launch::async, [&, lo, hi] {
      for (size_t k = lo; k < hi; ++k) eval_row(k);
    }));
  }
  for (auto& fu : futures) fu.get();
  return rows;
}

namespace {

json matrix_to_json(const Mat& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Mat matrix_from_json(const json& a, const char* what) {
  require(a.is_array() && !a.empty(), std::string("container field '") + what +
                                          "' must be a nonempty array");
  const Index rows = static_cast<Index>(a.size());
  const Index cols = static_cast<Index>(a.front().size());
  Mat m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const auto& row = a[static_cast<size_t>(i)];
    require(static_cast<Index>(row.size()) == cols,
            std::string("ragged rows in container field '") + what + "'");
    for (Index j = 0; j < cols; ++j) m(i, j) = row[static_cast<size_t>(j)].get<double>();
  }
  return m;
}

}  // namespace

void ParameterizedSolution::save(const std::string& path) const {
  json doc;
  doc["format"] = "infgmres-solution";
  doc["version"] = 1;
  doc["n"] = dim();
  doc["j"] = iterations();
  doc["c_norm"] = c_norm_;
  doc["scale"] = scale_;
  doc["mu_ref"] = mu_ref_;
  doc["eps"] = eps_;
  doc["converged"] = converged_;
  doc["H"] = matrix_to_json(h_);
  doc["Z_first"] = matrix_to_json(z_first_);
  if (!problem_json.empty()) doc["problem"] = json::parse(problem_json);
  if (rhs.size() > 0) {
    json b = json::array();
    for (Index i = 0; i < rhs.size(); ++i) b.push_back(rhs[i]);
    doc["b"] = std::move(b);
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << doc.dump();
  if (!out) throw Error("write failed for '" + path + "'");
}

ParameterizedSolution ParameterizedSolution::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open solution container '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error("unreadable solution container '" + path + "': " + e.what());
  }
  require(doc.value("format", "") == "infgmres-solution",
          "'" + path + "' is not a solution container");
  require(doc.value("version", 0) == 1, "unsupported container version");
  ParameterizedSolution sol(matrix_from_json(doc.at("Z_first"), "Z_first"),
                            matrix_from_json(doc.at("H"), "H"),
                            doc.at("c_norm").get<double>(),
                            doc.at("scale").get<double>(),
                            doc.at("mu_ref").get<double>(),
                            doc.at("eps").get<double>(),
                            doc.value("converged", true));
  require(sol.dim() == doc.at("n").get<Index>() &&
              sol.iterations() == doc.at("j").get<int>(),
          "container dimensions are inconsistent");
  if (doc.contains("problem")) sol.problem_json = doc["problem"].dump();
  if (doc.contains("b")) {
    const auto& b = doc["b"];
    sol.rhs.resize(static_cast<Index>(b.size()));
    for (Index i = 0; i < sol.rhs.size(); ++i)
      sol.rhs[i] = b[static_cast<size_t>(i)].get<double>();
  }
  return sol;
}

}  // namespace igm
