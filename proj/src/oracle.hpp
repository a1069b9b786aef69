// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "linalg.hpp"
#include "taylor_model.hpp"

namespace igm::oracle {

/// Explicitly assembled truncated companion matrices; brute-force reference
/// for everything the structured path computes implicitly. Dimension caps are
/// enforced so these paths cannot be invoked at production scale.
struct ExplicitCompanion {
  Mat k;  // (m+1)n x (m+1)n
  Mat m_shift;
  Vec c;
  int m = 0;
  Index n = 0;

  /// Block formula for the inverse (first block row A0^{-1}, -A0^{-1}A_l).
  Mat k_inverse(const TaylorMatrixFunction& f) const;
};

ExplicitCompanion build_explicit(const TaylorMatrixFunction& f, const Vec& b, int m,
                                 Index cap = 20000);

struct DenseFgmres {
  Mat q;  // (m+1)n x (j+1)
  Mat h;  // (j+1) x j
  std::vector<Vec> iterates;  // x_i at the given mu, i = 1..j
  bool breakdown = false;
};

/// Textbook flexible Arnoldi/GMRES on the explicit shifted system
/// (I - mu M K^{-1}), with a per-step preconditioner application. The default
/// applies K^{-1} exactly through a dense factorization.
DenseFgmres dense_fgmres(const Mat& k, const Mat& m_shift, const Vec& c, double mu,
                         int j,
                         std::function<Vec(const Vec&)> apply_precond = nullptr,
                         int gs_passes = 2);

/// Eigenvalues of M K^{-1}, sorted by modulus, descending.
std::vector<std::complex<double>> companion_spectrum(const TaylorMatrixFunction& f,
                                                     int m, Index cap = 20000);

/// Reference solution of A(mu) x = b by sparse LU of the closed form.
Vec direct_solve(const TaylorMatrixFunction& f, double mu, const Vec& b);

// Complex-parameter diagnostics. The solver core works over the reals; these
// small-scale reference routines extend evaluation into the complex plane
// (the scalar factors are entire functions, so the closed form analytically
// continues).

using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

/// Closed-form A(mu) at a complex parameter, dense (cap-enforced).
CMat eval_complex(const TaylorMatrixFunction& f, std::complex<double> mu,
                  Index cap = 20000);

/// Dense solve of A(mu) x = b at a complex parameter.
CVec direct_solve_complex(const TaylorMatrixFunction& f, std::complex<double> mu,
                          const Vec& b, Index cap = 20000);

/// Evaluates a stored parameterized solution at a complex parameter through
/// the complex shifted least-squares problem, and returns the relative
/// residual of the closed form there.
CVec evaluate_solution_complex(const Mat& z_first, const Mat& h, double c_norm,
                               double scale, std::complex<double> mu);
double complex_relative_residual(const TaylorMatrixFunction& f, const Vec& b,
                                 const Mat& z_first, const Mat& h, double c_norm,
                                 double scale, std::complex<double> mu,
                                 Index cap = 20000);

}  // namespace igm::oracle
