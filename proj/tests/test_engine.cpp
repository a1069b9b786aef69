// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "engine.hpp"
#include "hessenberg_ls.hpp"
#include "oracle.hpp"
#include "problem_gallery.hpp"

using namespace igm;

namespace {

SparseMat dense_to_sparse(const Mat& d) {
  SparseMat s = d.sparseView();
  s.makeCompressed();
  return s;
}

TaylorMatrixFunction random_poly_family(Index n, int degree, uint64_t seed) {
  Rng rng(seed);
  std::vector<SparseMat> coeffs;
  for (int l = 0; l <= degree; ++l) {
    Mat d(n, n);
    for (Index r = 0; r < n; ++r)
      for (Index c = 0; c < n; ++c) d(r, c) = rng.uniform_sym();
    if (l == 0) d += 3.0 * Mat::Identity(n, n);
    coeffs.push_back(dense_to_sparse(d));
  }
  return gallery::family_from_coefficients(std::move(coeffs));
}

}  // namespace

TEST_CASE("shifted least squares") {
  // Hand-checkable 1-column case: B = [1; -mu*beta].
  Mat h = Mat::Zero(2, 1);
  h(1, 0) = 2.0;
  const double mu = 0.5;
  const auto ls = solve_shifted_ls(h, 1, mu, 3.0);
  CHECK(ls.w[0] == doctest::Approx(3.0 / 2.0));  // (1+mu^2 b^2)^(-1) c = 3/2
  CHECK(ls.residual_norm == doctest::Approx(3.0 / std::sqrt(2.0)));

  // mu = 0 is the trivial problem.
  const auto trivial = solve_shifted_ls(h, 1, 0.0, 3.0);
  CHECK(trivial.w[0] == 3.0);
  CHECK(trivial.residual_norm == 0.0);

  // Singular values of the padded identity are all one.
  Mat h4 = Mat::Zero(5, 4);
  CHECK(sigma_min_shifted(h4, 4, 0.7) == doctest::Approx(1.0));
}

TEST_CASE("constant family converges geometrically in |mu|") {
  // With A_l = 0 for l >= 1 the companion operator is a nilpotent-style
  // shift: the iterate approaches A0^{-1} b at rate |mu| per iteration and
  // is exact at mu = 0 after one step.
  const auto f = random_poly_family(12, 0, 3);
  Vec b = Vec::LinSpaced(12, 1.0, 2.0);

  SolverConfig cfg;
  cfg.j_max = 30;
  cfg.eps = 1e-12;
  cfg.mu_ref = 0.25;
  RunResult rr = run(f, b, cfg);

  LuInnerSolver lu(f.coeff(0));
  const Vec x_star = lu.solve(b);
  CHECK((rr.solution.evaluate(0.0) - x_star).norm() <= 1e-13 * x_star.norm());
  CHECK((rr.solution.evaluate(0.25) - x_star).norm() <= 1e-12 * x_star.norm());

  // Exact-residual decay rate tracks |mu|.
  const auto& rows = rr.trace.rows;
  const double rate = rows[7].rel_res_exact / rows[6].rel_res_exact;
  CHECK(rate == doctest::Approx(0.25).epsilon(0.05));
}

TEST_CASE("basis invariants on a delay run") {
  const auto p = gallery::time_delay(60, 3, 15);
  SolverConfig cfg;
  cfg.j_max = 15;
  cfg.eps = 1e-10;
  cfg.mu_ref = 0.2;
  cfg.keep_full_ztilde = true;
  RunResult rr = run(p.family, p.b, cfg);
  const auto& fact = rr.fact;
  REQUIRE(fact.j == 15);

  SUBCASE("orthonormality") {
    CHECK(fact.max_offdiag_gram() <= 1e-12);
    for (const auto& col : fact.q) CHECK(col.norm() == doctest::Approx(1.0));
  }

  SUBCASE("block growth is exact") {
    for (int i = 0; i < static_cast<int>(fact.q.size()); ++i)
      CHECK(fact.q[i].active_blocks() == i + 1);
    for (int i = 0; i < fact.j; ++i)
      CHECK(fact.ztilde[i].active_blocks() == i + 1);
  }

  SUBCASE("Hessenberg structure") {
    for (int c = 0; c < fact.j; ++c)
      for (int r = c + 2; r <= fact.j; ++r) CHECK(fact.h(r, c) == 0.0);
  }

  SUBCASE("companion Arnoldi relation") {
    // shift_down(z_i) = sum_l H(l,i) q_l holds to orthogonalization roundoff.
    for (int i = 1; i <= fact.j; ++i) {
      BlockVector y = shift_down(fact.ztilde[i - 1]);
      Vec dense = y.to_dense(i + 1);
      for (int l = 0; l <= i; ++l)
        dense -= fact.h(l, i - 1) * fact.q[l].to_dense(i + 1);
      CHECK(dense.norm() <= 1e-12 * y.norm());
    }
  }

  SUBCASE("exact residual equals the companion residual when inner is exact") {
    for (int i : {3, 9, 15}) {
      const double rt = fact.exact_residual_norm(0.2, i);
      const double rc = fact.companion_residual_norm(0.2, i);
      CHECK(rc == doctest::Approx(rt).epsilon(1e-8));
    }
  }
}

TEST_CASE("structured run matches the dense flexible-Arnoldi oracle") {
  const Index n = 8;
  const int j = 6;
  const auto f = random_poly_family(n, 14, 101);
  Rng rng(55);
  Vec b(n);
  for (Index i = 0; i < n; ++i) b[i] = rng.uniform_sym();

  SolverConfig cfg;
  cfg.j_max = j;
  cfg.eps = 1e-10;
  cfg.mu_ref = 0.3;
  RunResult rr = run(f, b, cfg);

  const auto ec = oracle::build_explicit(f, b, 6);
  const auto dense = oracle::dense_fgmres(ec.k, ec.m_shift, ec.c, 0.3, j);
  REQUIRE(dense.h.cols() == j);
  CHECK((dense.h - rr.fact.h).norm() <= 1e-12 * dense.h.norm());
  for (int i = 0; i <= j; ++i) {
    const Vec structured = rr.fact.q[i].to_dense(7);
    CHECK((structured - dense.q.col(i)).norm() <= 1e-12);
  }
}

TEST_CASE("small-problem residual equals the assembled companion residual") {
  // The cheap |r~| from the Hessenberg least squares must agree with the
  // assembled |c - (K - nu M) Z w| when the inner solves are exact.
  const Index n = 8;
  const int j = 6, m = 10;
  const auto f = random_poly_family(n, m, 202);
  Rng rng(8);
  Vec b(n);
  for (Index i = 0; i < n; ++i) b[i] = rng.uniform_sym();

  SolverConfig cfg;
  cfg.j_max = j;
  cfg.eps = 1e-10;
  cfg.mu_ref = 0.2;
  cfg.keep_full_ztilde = true;
  RunResult rr = run(f, b, cfg);

  const auto ec = oracle::build_explicit(f, b, m);
  Mat z_dense(ec.c.size(), j);
  for (int i = 0; i < j; ++i) z_dense.col(i) = rr.fact.ztilde[i].to_dense(m + 1);
  for (const double nu : {0.2, 0.05, -0.1}) {
    const auto ls = solve_shifted_ls(rr.fact.h, j, nu, rr.fact.c_norm);
    const Vec resid = ec.c - (ec.k - nu * ec.m_shift) * (z_dense * ls.w);
    CHECK(rr.fact.exact_residual_norm(nu) ==
          doctest::Approx(resid.norm()).epsilon(1e-10));
  }
  // An empty basis leaves the full right-hand side.
  CHECK(rr.fact.exact_residual_norm(0.2, 0) == rr.fact.c_norm);
}

TEST_CASE("problem residual is bounded by the split") {
  // |A(mu_ref) x - b| stays within |r~| + delta plus a roundoff allowance.
  const auto p = gallery::time_delay(150, 4, 23);
  SolverConfig cfg;
  cfg.j_max = 25;
  cfg.eps = 1e-9;
  cfg.mu_ref = 0.2;
  cfg.inner = InnerConfig::perturbed(17);
  RunResult rr = run(p.family, p.b, cfg);
  const double bnorm = p.b.norm();
  for (int i : {5, 15, 25}) {
    const Vec x = rr.solution.evaluate_prefix(i, cfg.mu_ref);
    const double true_abs = (p.family.eval(cfg.mu_ref) * x - p.b).norm();
    const double rtilde = rr.fact.exact_residual_norm(cfg.mu_ref, i);
    const double delta = rr.fact.delta_norm(cfg.mu_ref, i);
    CHECK(true_abs <= rtilde + delta + 1e-12 * bnorm * 100.0);
  }
}

TEST_CASE("rank-deficient shifted systems fall back to a truncated solve") {
  // B = I_ - mu*H_ loses a pivot exactly when 1/mu is a Ritz value; with
  // H = [2; 0] and mu = 1/2 the single column vanishes.
  Mat h = Mat::Zero(2, 1);
  h(0, 0) = 2.0;
  const auto ls = solve_shifted_ls(h, 1, 0.5, 1.0);
  CHECK(ls.rank_deficient);
  CHECK(ls.w[0] == 0.0);
  CHECK(ls.residual_norm == doctest::Approx(1.0));
}

TEST_CASE("reported defects match an independent reconstruction") {
  const auto p = gallery::time_delay(80, 3, 12);
  SolverConfig cfg;
  cfg.j_max = 12;
  cfg.eps = 1e-9;
  cfg.mu_ref = 0.2;
  cfg.keep_full_ztilde = true;
  cfg.inner = InnerConfig::bicgstab(20000);
  RunResult rr = run(p.family, p.b, cfg);

  for (int i = 1; i <= rr.fact.j; ++i) {
    const auto& q = rr.fact.q[i - 1];
    Vec rhs = q.block(0);
    for (int l = 1; l < i; ++l) rhs -= p.family.coeff(l) * q.block(l);
    const Vec w = rr.fact.ztilde[i - 1].block(0);
    const double recomputed = (p.family.coeff(0) * w - rhs).norm();
    CHECK(std::abs(recomputed - rr.fact.reports[i - 1].p_norm) <=
          1e-13 * rhs.norm());
  }
}

TEST_CASE("DGKS re-orthogonalization keeps the basis orthonormal") {
  const auto p = gallery::time_delay(60, 3, 15);
  SolverConfig cfg;
  cfg.j_max = 15;
  cfg.eps = 1e-10;
  cfg.mu_ref = 0.2;
  cfg.reorth = SolverConfig::Reorth::Dgks;
  RunResult rr = run(p.family, p.b, cfg);
  CHECK(rr.fact.max_offdiag_gram() <= 1e-12);
  CHECK(rr.solution.true_relative_residual(0.2, p.family, p.b) <= 1e-9);
}

TEST_CASE("inner budget policy") {
  SolverConfig cfg;
  cfg.eps = 1e-10;
  cfg.ell = 1.0;
  CHECK(eps_inner_value(1.0, cfg) == 1e-10);
  // Halving the residual doubles the budget.
  CHECK(eps_inner_value(0.5, cfg) == doctest::Approx(2e-10));
  CHECK_THROWS_AS(eps_inner_value(0.0, cfg), Error);

  cfg.ell_policy = SolverConfig::EllPolicy::StrictTwoPass;
  CHECK_THROWS_AS(cfg.validate(), Error);  // needs sigma from a prior pass
}

TEST_CASE("strict two-pass with mu_ref = 0") {
  // At mu_ref = 0 the shifted matrix is the padded identity, so sigma_j = 1
  // and the first budget is eps / (j |b|).
  const auto p = gallery::time_delay(30, 2, 44);
  SolverConfig cfg;
  cfg.j_max = 8;
  cfg.eps = 1e-8;
  cfg.mu_ref = 0.0;
  cfg.inner = InnerConfig::perturbed(7);
  RunResult rr = run_two_pass(p.family, p.b, cfg);
  CHECK(rr.strict_sigma == doctest::Approx(1.0));
  CHECK(rr.trace.rows[0].eps_inner ==
        doctest::Approx(1e-8 / (8.0 * p.b.norm())).epsilon(1e-12));
}

TEST_CASE("orthogonalization") {
  const Index n = 6;
  std::vector<BlockVector> q;
  Vec e1 = Vec::Zero(n);
  e1[0] = 1.0;
  q.push_back(BlockVector::from_block(e1));

  SUBCASE("orthogonal input is untouched") {
    Vec e2 = Vec::Zero(n);
    e2[1] = 4.0;
    auto r = orthogonalize(BlockVector::from_block(e2), q,
                           SolverConfig::Reorth::Twice, 0.7);
    CHECK(r.h.norm() == 0.0);
    CHECK(r.beta == 4.0);
  }
  SUBCASE("duplicate input breaks down") {
    auto r = orthogonalize(BlockVector::from_block(e1), q,
                           SolverConfig::Reorth::Twice, 0.7);
    CHECK(r.beta <= 1e-14);
  }
  SUBCASE("near-parallel input is re-orthogonalized") {
    Rng rng(12);
    Vec noise(n);
    for (Index i = 0; i < n; ++i) noise[i] = 1e-9 * rng.uniform_sym();
    auto r = orthogonalize(BlockVector::from_block(e1 + noise), q,
                           SolverConfig::Reorth::Twice, 0.7);
    REQUIRE(!r.breakdown);
    CHECK(std::abs(q[0].dot(r.q_new)) <= 1e-12);
  }
}

TEST_CASE("scalar family runs to completion") {
  // Each structured product appends one genuinely new block, so beta never
  // vanishes and the basis keeps extending even for n = 1.
  SparseMat a0(1, 1), a1(1, 1);
  a0.insert(0, 0) = 2.0;
  a1.insert(0, 0) = 1.0;
  std::vector<SparseMat> coeffs = {a0, a1};
  const auto f = gallery::family_from_coefficients(std::move(coeffs));
  Vec b(1);
  b[0] = 1.0;
  SolverConfig cfg;
  cfg.j_max = 6;
  cfg.eps = 1e-10;
  cfg.mu_ref = 0.1;
  RunResult rr = run(f, b, cfg);
  CHECK(rr.converged);
  CHECK(rr.fact.j == 6);
  CHECK_FALSE(rr.fact.lucky_breakdown);
  // x(mu) = 1/(2+mu) is recovered well inside the budget at small mu.
  CHECK(rr.solution.evaluate(0.1)[0] == doctest::Approx(1.0 / 2.1).epsilon(1e-6));
}

TEST_CASE("trace bookkeeping") {
  const auto p = gallery::time_delay(40, 2, 8);
  SolverConfig cfg;
  cfg.j_max = 10;
  cfg.eps = 1e-9;
  cfg.mu_ref = 0.15;
  cfg.inner = InnerConfig::perturbed(3);
  RunResult rr = run(p.family, p.b, cfg);
  REQUIRE(rr.trace.rows.size() == 10);
  double r_prev = rr.fact.c_norm;
  for (const auto& row : rr.trace.rows) {
    CHECK(std::abs(row.eps_inner * r_prev - cfg.eps) <= 1e-14 * cfg.eps);
    CHECK(row.p_norm <= row.eps_inner * (1.0 + 1e-12));
    r_prev = row.rel_res_exact * rr.fact.c_norm;
  }
  // reports mirror the trace
  REQUIRE(rr.fact.reports.size() == 10);
  for (size_t i = 0; i < 10; ++i) {
    CHECK(rr.fact.reports[i].iteration == static_cast<int>(i + 1));
    CHECK(rr.fact.reports[i].p_norm == rr.trace.rows[i].p_norm);
  }
}

namespace {

/// Succeeds for a fixed number of applications, then reports failure.
class FlakyInner : public InnerSolver {
 public:
  FlakyInner(const SparseMat& a, int good_calls)
      : lu_(a), remaining_(good_calls) {}
  InnerApply apply(const Vec& rhs, double eps) override {
    if (remaining_-- <= 0) {
      InnerApply bad;
      bad.w = Vec::Zero(rhs.size());
      bad.converged = false;
      bad.kind = "flaky";
      return bad;
    }
    return lu_.apply(rhs, eps);
  }
  const SparseMat& matrix() const override { return lu_.matrix(); }

 private:
  LuInnerSolver lu_;
  int remaining_;
};

}  // namespace

TEST_CASE("inner-solver failure keeps the partial run") {
  const auto p = gallery::time_delay(30, 2, 6);
  SolverConfig cfg;
  cfg.j_max = 10;
  cfg.eps = 1e-10;
  cfg.mu_ref = 0.2;

  FlakyInner inner(p.family.coeff(0), 4);
  RunResult rr = run(p.family, p.b, cfg, inner);
  CHECK_FALSE(rr.converged);
  CHECK(rr.fact.j == 4);
  CHECK(rr.trace.rows.size() == 4);
  CHECK(rr.stop_reason.find("iteration 5") != std::string::npos);

  // Failing on the very first application leaves nothing to return.
  FlakyInner dead(p.family.coeff(0), 0);
  CHECK_THROWS_AS(run(p.family, p.b, cfg, dead), Error);
}

TEST_CASE("zero right-hand side is rejected") {
  const auto f = random_poly_family(5, 1, 2);
  SolverConfig cfg;
  cfg.mu_ref = 0.1;
  CHECK_THROWS_AS(run(f, Vec::Zero(5), cfg), Error);
}
