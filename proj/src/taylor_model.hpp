// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <mutex>
#include <vector>

#include "linalg.hpp"

namespace igm {

/// Scalar factor f(mu) of one term C*f(mu). The closed set of kinds keeps
/// every Taylor coefficient exact (a rational times a power), so no numerical
/// differentiation is ever involved.
class ScalarFunction {
 public:
  enum class Kind { Poly, Exp, Sin, Cos };

  static ScalarFunction poly(std::vector<double> coeffs);
  static ScalarFunction exp(double a);
  static ScalarFunction sin(double a);
  static ScalarFunction cos(double a);

  Kind kind() const { return kind_; }
  const std::vector<double>& poly_coeffs() const { return coeffs_; }
  double arg_scale() const { return a_; }

  /// Coefficient of mu^ell in the Taylor expansion of f around 0.
  double taylor_coeff(int ell) const;
  double eval(double mu) const;

 private:
  ScalarFunction(Kind k, std::vector<double> c, double a)
      : kind_(k), coeffs_(std::move(c)), a_(a) {}
  Kind kind_;
  std::vector<double> coeffs_;  // Poly only
  double a_;                    // Exp/Sin/Cos argument scale
};

/// A parameterized matrix family A(mu) = sum_k C_k f_k(mu) with
/// Taylor-coefficient access and an optional closed-form evaluator.
///
/// A reparameterization factor s turns the family into A_hat(nu) = A(s*nu):
/// coeff(ell) returns the coefficient of A_hat, i.e. A_ell * s^ell, while
/// eval(mu) always works in the original parameterization.
class TaylorMatrixFunction {
 public:
  struct Term {
    SparseMat matrix;
    ScalarFunction function;
  };

  TaylorMatrixFunction(std::vector<Term> terms, double scale = 1.0,
                       bool with_evaluator = true);
  TaylorMatrixFunction(const TaylorMatrixFunction& other);
  TaylorMatrixFunction& operator=(const TaylorMatrixFunction&) = delete;
  TaylorMatrixFunction(TaylorMatrixFunction&& other) noexcept;

  Index dim() const { return n_; }
  double scale() const { return scale_; }
  bool has_evaluator() const { return with_evaluator_; }
  const std::vector<Term>& terms() const { return terms_; }

  /// ell-th Taylor coefficient with the scale folded in (A_ell * s^ell).
  /// Coefficients are built lazily and memoized; safe under concurrent readers.
  const SparseMat& coeff(int ell) const;

  /// Closed-form A(mu) in the original parameterization.
  SparseMat eval(double mu) const;

  /// The family A_hat(nu) = A(s*nu); factors compose multiplicatively.
  TaylorMatrixFunction rescaled(double s) const;

 private:
  Index n_;
  std::vector<Term> terms_;
  double scale_;
  bool with_evaluator_;
  mutable std::mutex memo_mutex_;
  mutable std::vector<std::unique_ptr<const SparseMat>> memo_;
};

}  // namespace igm
