// SPDX-License-Identifier: Apache-2.0
#include "problem_gallery.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "matrix_market.hpp"

namespace igm::gallery {

using nlohmann::json;

namespace {

SparseMat identity(Index n) {
  SparseMat id(n, n);
  id.setIdentity();
  return id;
}

SparseMat diagonal(const Vec& d) {
  SparseMat m(d.size(), d.size());
  m.reserve(Eigen::VectorXi::Constant(d.size(), 1));
  for (Index i = 0; i < d.size(); ++i) m.insert(i, i) = d[i];
  m.makeCompressed();
  return m;
}

SparseMat random_banded(Index n, int bandwidth, Rng& rng, double diag_shift) {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(n) * (2 * bandwidth + 1));
  const double scale = 1.0 / bandwidth;
  for (Index i = 0; i < n; ++i) {
    for (Index j = std::max<Index>(0, i - bandwidth);
         j <= std::min<Index>(n - 1, i + bandwidth); ++j) {
      double v = rng.uniform_sym() * scale;
      if (i == j) v += diag_shift;
      trips.emplace_back(i, j, v);
    }
  }
  SparseMat a(n, n);
  a.setFromTriplets(trips.begin(), trips.end());
  a.makeCompressed();
  return a;
}

}  // namespace

DelayProblem time_delay(int n, int bandwidth, uint64_t seed) {
  require(n >= 2, "time_delay: n must be at least 2");
  require(bandwidth >= 1 && bandwidth < n, "time_delay: invalid bandwidth");
  Rng rng(seed);
  // Diagonal shift keeps A(0) = A0 + A1 comfortably nonsingular.
  SparseMat a0 = random_banded(n, bandwidth, rng, 2.0 * bandwidth);
  SparseMat a1 = random_banded(n, bandwidth, rng, 0.0);
  Vec b(n);
  for (Index i = 0; i < n; ++i) b[i] = rng.uniform_sym();
  b.normalize();

  std::vector<TaylorMatrixFunction::Term> terms;
  terms.push_back({identity(n), ScalarFunction::poly({0.0, -1.0})});
  terms.push_back({a0, ScalarFunction::poly({1.0})});
  terms.push_back({a1, ScalarFunction::exp(-1.0)});
  return DelayProblem{TaylorMatrixFunction(std::move(terms)), std::move(b),
                      std::move(a0), std::move(a1)};
}

HelmholtzProblem helmholtz_fd(int g, double alpha) {
  require(g >= 8, "helmholtz_fd: grid must be at least 8 points per side");
  const Index n = static_cast<Index>(g) * g;
  const double h = 1.0 / (g + 1);
  const double h2 = h * h;

  // 5-point Laplacian scaled by h^2 (entries 4 and -1), which mirrors the
  // magnitude balance of an assembled weak form: the coefficient terms and
  // the load pick up the same h^2 factor.
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(5 * n));
  const auto idx = [g](int ix, int iy) { return static_cast<Index>(iy) * g + ix; };
  for (int iy = 0; iy < g; ++iy) {
    for (int ix = 0; ix < g; ++ix) {
      const Index p = idx(ix, iy);
      trips.emplace_back(p, p, 4.0);
      if (ix > 0) trips.emplace_back(p, idx(ix - 1, iy), -1.0);
      if (ix < g - 1) trips.emplace_back(p, idx(ix + 1, iy), -1.0);
      if (iy > 0) trips.emplace_back(p, idx(ix, iy - 1), -1.0);
      if (iy < g - 1) trips.emplace_back(p, idx(ix, iy + 1), -1.0);
    }
  }
  SparseMat a0(n, n);
  a0.setFromTriplets(trips.begin(), trips.end());
  a0.makeCompressed();

  Vec k_vals(n), beta_vals(n), load(n);
  for (int iy = 0; iy < g; ++iy) {
    for (int ix = 0; ix < g; ++ix) {
      const double x1 = (ix + 1) * h;
      const double ramp = x1 < 0.5 ? x1 : 1.0 - x1;
      const Index p = idx(ix, iy);
      k_vals[p] = 1.0 + ramp * std::sin(alpha * std::numbers::pi * x1);
      beta_vals[p] = std::sin(2.0 * std::numbers::pi * x1);
      load[p] = h2 * std::exp(-alpha * x1);
    }
  }

  SparseMat a1 = h2 * identity(n);
  SparseMat a2 = diagonal(h2 * k_vals);
  SparseMat a3 = diagonal(h2 * k_vals.cwiseProduct(k_vals));
  SparseMat a4 = diagonal(h2 * beta_vals);

  std::vector<TaylorMatrixFunction::Term> terms;
  terms.push_back({a0, ScalarFunction::poly({1.0})});
  terms.push_back({a1, ScalarFunction::poly({0.0, 1.0})});
  terms.push_back({a2, ScalarFunction::poly({0.0, 0.0, 2.0})});
  terms.push_back({a3, ScalarFunction::poly({0.0, 0.0, 0.0, 1.0})});
  terms.push_back({a4, ScalarFunction::sin(1.0)});
  return HelmholtzProblem{TaylorMatrixFunction(std::move(terms)),
                          std::move(load),
                          std::move(a0),
                          std::move(a1),
                          std::move(a2),
                          std::move(a3),
                          std::move(a4),
                          g,
                          alpha};
}

namespace {

ScalarFunction parse_function(const json& fn, const std::string& ctx) {
  require(fn.is_object() && fn.contains("kind"),
          ctx + ": function must be an object with a 'kind'");
  const std::string kind = fn.at("kind").get<std::string>();
  if (kind == "poly") {
    require(fn.contains("coeffs") && fn["coeffs"].is_array() && !fn["coeffs"].empty(),
            ctx + ": poly needs a nonempty 'coeffs' array");
    std::vector<double> c;
    for (const auto& v : fn["coeffs"]) c.push_back(v.get<double>());
    return ScalarFunction::poly(std::move(c));
  }
  const double a = fn.value("a", 1.0);
  if (kind == "exp") return ScalarFunction::exp(a);
  if (kind == "sin") return ScalarFunction::sin(a);
  if (kind == "cos") return ScalarFunction::cos(a);
  throw Error(ctx + ": unknown function kind '" + kind +
              "' (expected poly|exp|sin|cos)");
}

}  // namespace

std::pair<TaylorMatrixFunction, Vec> from_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open manifest '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error("manifest '" + path + "': " + e.what());
  }
  require(doc.contains("n") && doc["n"].is_number_integer(),
          "manifest field 'n' (integer) is required");
  require(doc.contains("terms") && doc["terms"].is_array() && !doc["terms"].empty(),
          "manifest field 'terms' (nonempty array) is required");
  const Index n = doc["n"].get<Index>();
  const double scale = doc.value("scale", 1.0);
  require(scale > 0.0, "manifest field 'scale' must be positive");

  const auto base = std::filesystem::path(path).parent_path();
  const auto resolve = [&](const std::string& p) {
    std::filesystem::path fp(p);
    return fp.is_absolute() ? fp.string() : (base / fp).string();
  };

  std::vector<TaylorMatrixFunction::Term> terms;
  int index = 0;
  for (const auto& t : doc["terms"]) {
    const std::string ctx = "manifest '" + path + "' term " + std::to_string(index);
    require(t.contains("matrix_path"), ctx + ": 'matrix_path' is required");
    SparseMat m = mm::read_matrix(resolve(t["matrix_path"].get<std::string>()));
    require(m.rows() == n && m.cols() == n,
            ctx + ": matrix is " + std::to_string(m.rows()) + "x" +
                std::to_string(m.cols()) + " but manifest says n=" +
                std::to_string(n));
    require(t.contains("function"), ctx + ": 'function' is required");
    terms.push_back({std::move(m), parse_function(t["function"], ctx)});
    ++index;
  }

  Vec b;
  if (doc.contains("rhs_path")) {
    b = mm::read_vector(resolve(doc["rhs_path"].get<std::string>()));
    require(b.size() == n, "manifest rhs has dimension " +
                               std::to_string(b.size()) + ", expected " +
                               std::to_string(n));
  } else {
    b = Vec::Ones(n);
    b.normalize();
  }
  return {TaylorMatrixFunction(std::move(terms), scale), std::move(b)};
}

TaylorMatrixFunction family_from_coefficients(std::vector<SparseMat> coeffs) {
  require(!coeffs.empty(), "family_from_coefficients: no coefficients");
  std::vector<TaylorMatrixFunction::Term> terms;
  for (size_t l = 0; l < coeffs.size(); ++l) {
    std::vector<double> poly(l + 1, 0.0);
    poly[l] = 1.0;
    terms.push_back({std::move(coeffs[l]), ScalarFunction::poly(std::move(poly))});
  }
  return TaylorMatrixFunction(std::move(terms));
}

}  // namespace igm::gallery
