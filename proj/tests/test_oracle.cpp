// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <Eigen/SVD>

#include "engine.hpp"
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

TEST_CASE("explicit companion assembly") {
  const auto f = random_poly_family(6, 8, 7);
  const Vec b = Vec::LinSpaced(6, 1.0, 2.0);

  SUBCASE("m = 0 collapses to the stiffness block") {
    const auto ec = oracle::build_explicit(f, b, 0);
    CHECK((ec.k - Mat(f.coeff(0))).norm() == 0.0);
    CHECK(ec.m_shift.norm() == 0.0);
    CHECK((ec.c - b).norm() == 0.0);
  }
  SUBCASE("block inverse multiplies back to the identity") {
    const auto ec = oracle::build_explicit(f, b, 8);
    const Mat prod = ec.k * ec.k_inverse(f);
    CHECK((prod - Mat::Identity(prod.rows(), prod.cols())).norm() <= 1e-12);
  }
  SUBCASE("dimension cap") {
    CHECK_THROWS_AS(oracle::build_explicit(f, b, 5000), Error);
  }
}

TEST_CASE("solutions of the linearized and truncated systems correspond") {
  const Index n = 8;
  const int m = 4;
  const auto f = random_poly_family(n, m, 21);
  Rng rng(3);
  Vec b(n);
  for (Index i = 0; i < n; ++i) b[i] = rng.uniform_sym();
  const auto ec = oracle::build_explicit(f, b, m);

  for (const double mu : {0.1, 0.3, -0.2}) {
    // Truncated polynomial evaluation A_m(mu).
    Mat a_m = Mat::Zero(n, n);
    double mu_pow = 1.0;
    for (int l = 0; l <= m; ++l) {
      a_m += mu_pow * Mat(f.coeff(l));
      mu_pow *= mu;
    }

    // explicit solve -> power-stacked blocks and a solution of the truncated
    // problem
    const Mat pencil = ec.k - mu * ec.m_shift;
    const Vec v = pencil.partialPivLu().solve(ec.c);
    const Vec x = v.head(n);
    mu_pow = 1.0;
    for (int l = 0; l <= m; ++l) {
      CHECK((v.segment(l * n, n) - mu_pow * x).norm() <= 1e-10 * v.norm());
      mu_pow *= mu;
    }
    CHECK((a_m * x - b).norm() <= 1e-10 * b.norm());

    // direct solve of the truncated problem -> explicit system
    const Vec x2 = a_m.partialPivLu().solve(b);
    Vec v2(ec.c.size());
    mu_pow = 1.0;
    for (int l = 0; l <= m; ++l) {
      v2.segment(l * n, n) = mu_pow * x2;
      mu_pow *= mu;
    }
    CHECK((pencil * v2 - ec.c).norm() <= 1e-10 * ec.c.norm());
  }
}

TEST_CASE("dense flexible Arnoldi") {
  const Index n = 6;
  const int m = 6;
  const auto f = random_poly_family(n, m, 17);
  Rng rng(9);
  Vec b(n);
  for (Index i = 0; i < n; ++i) b[i] = rng.uniform_sym();
  const auto ec = oracle::build_explicit(f, b, m);

  SUBCASE("first iterate is the best multiple of the preconditioned start") {
    const double mu = 0.4;
    const auto r = oracle::dense_fgmres(ec.k, ec.m_shift, ec.c, mu, 1);
    REQUIRE(r.iterates.size() == 1);
    const Vec z1 = ec.k.partialPivLu().solve(ec.c);
    // 1-D least squares for c ~ (K - mu M) alpha z1
    const Vec az = (ec.k - mu * ec.m_shift) * z1;
    const double alpha = az.dot(ec.c) / az.squaredNorm();
    CHECK((r.iterates[0] - alpha * z1).norm() <= 1e-12 * z1.norm());
  }
  SUBCASE("mu = 0 converges in one iteration") {
    const auto r = oracle::dense_fgmres(ec.k, ec.m_shift, ec.c, 0.0, 1);
    const Vec x1 = r.iterates[0];
    CHECK((ec.k * x1 - ec.c).norm() <= 1e-12 * ec.c.norm());
  }
  SUBCASE("basis is orthonormal") {
    const auto r = oracle::dense_fgmres(ec.k, ec.m_shift, ec.c, 0.3, 5);
    const Mat gram = r.q.transpose() * r.q;
    CHECK((gram - Mat::Identity(gram.rows(), gram.cols())).norm() <= 1e-12);
  }
}

TEST_CASE("companion spectrum") {
  SUBCASE("constant family is nilpotent") {
    const auto f = random_poly_family(4, 0, 31);
    const int m = 6;
    // The exact structural statement: the (m+1)-th power vanishes.
    const auto ec = oracle::build_explicit(f, Vec::Ones(4), m);
    Mat mk = ec.m_shift * ec.k_inverse(f);
    Mat power = mk;
    for (int k = 0; k < m; ++k) power = power * mk;
    CHECK(power.norm() <= 1e-12);
    // Computed eigenvalues of a nilpotent matrix are only accurate to about
    // eps^(1/(m+1)); the check reflects that conditioning.
    const auto spec = oracle::companion_spectrum(f, m);
    for (const auto& g : spec) CHECK(std::abs(g) <= 1e-2);
  }
  SUBCASE("scalar affine family has one finite reciprocal root") {
    // A(mu) = a0 + a1 mu with m = 1: eigenvalues {0, -a1/a0}.
    SparseMat a0(1, 1), a1(1, 1);
    a0.insert(0, 0) = 2.0;
    a1.insert(0, 0) = 0.5;
    std::vector<SparseMat> coeffs = {a0, a1};
    const auto f = gallery::family_from_coefficients(std::move(coeffs));
    const auto spec = oracle::companion_spectrum(f, 1);
    REQUIRE(spec.size() == 2);
    CHECK(std::abs(spec[0] - std::complex<double>(-0.25, 0.0)) <= 1e-12);
    CHECK(std::abs(spec[1]) <= 1e-12);
  }
  SUBCASE("reciprocals solve the delay eigenproblem") {
    // Narrow band keeps the closed-form eigenvalues (|lambda| ~ 2*bandwidth)
    // well inside the truncation-artifact contour (|lambda| ~ m/e), so the
    // leading companion eigenvalues are converged reciprocal roots.
    const auto p = gallery::time_delay(50, 2, 11);
    const auto spec = oracle::companion_spectrum(p.family, 30);
    int checked = 0;
    for (const auto& g : spec) {
      if (checked >= 3) break;
      const std::complex<double> lambda = 1.0 / g;
      Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(50, 50) ;
      a -= lambda * Eigen::MatrixXcd::Identity(50, 50);
      a += Mat(p.a0).cast<std::complex<double>>();
      a += std::exp(-lambda) * Mat(p.a1).cast<std::complex<double>>();
      Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a);
      const auto& sv = svd.singularValues();
      CHECK(sv(sv.size() - 1) <= 1e-6 * sv(0));
      ++checked;
    }
    CHECK(checked == 3);
  }
}

TEST_CASE("complex-parameter diagnostics") {
  const auto p = gallery::time_delay(24, 2, 19);

  SUBCASE("complex evaluation continues the closed form") {
    const auto a_real = p.family.eval(0.3);
    const auto a_cplx = oracle::eval_complex(p.family, {0.3, 0.0});
    CHECK((a_cplx - Mat(a_real).cast<std::complex<double>>()).norm() <=
          1e-14 * a_real.norm());
    // exp(-mu) at a purely imaginary argument has unit modulus entries
    const auto rotated = oracle::eval_complex(p.family, {0.0, 1.0});
    CHECK(rotated.imag().norm() > 0.0);
  }

  SUBCASE("complex solve and solution evaluation agree near the real axis") {
    SolverConfig cfg;
    cfg.j_max = 20;
    cfg.eps = 1e-12;
    cfg.mu_ref = 0.2;
    const RunResult rr = run(p.family, p.b, cfg);
    const auto& sol = rr.solution;

    // At a real parameter the complex path reproduces the real one.
    const std::complex<double> mu_real{0.1, 0.0};
    const auto xc = oracle::evaluate_solution_complex(
        sol.z_first(), sol.hessenberg(), sol.c_norm(), sol.scale(), mu_real);
    CHECK((xc.real() - sol.evaluate(0.1)).norm() <= 1e-10);
    CHECK(xc.imag().norm() <= 1e-12);

    // Inside the convergence region a genuinely complex parameter still
    // yields a small residual against the analytically continued closed form.
    const double rel = oracle::complex_relative_residual(
        p.family, p.b, sol.z_first(), sol.hessenberg(), sol.c_norm(),
        sol.scale(), {0.05, 0.05});
    CHECK(rel <= 1e-8);
    const auto x_ref = oracle::direct_solve_complex(p.family, {0.05, 0.05}, p.b);
    CHECK((oracle::evaluate_solution_complex(sol.z_first(), sol.hessenberg(),
                                             sol.c_norm(), sol.scale(),
                                             {0.05, 0.05}) -
           x_ref)
              .norm() <= 1e-7 * x_ref.norm());
  }
}

TEST_CASE("direct reference solve") {
  const auto p = gallery::time_delay(1000, 5, 13);
  SUBCASE("mu = 0") {
    const Vec x = oracle::direct_solve(p.family, 0.0, p.b);
    CHECK((SparseMat(p.a0 + p.a1) * x - p.b).norm() <= 1e-12 * p.b.norm());
  }
  SUBCASE("general mu on the banded problem") {
    const Vec x = oracle::direct_solve(p.family, 0.17, p.b);
    CHECK((p.family.eval(0.17) * x - p.b).norm() <= 1e-12 * p.b.norm());
  }
}
