// SPDX-License-Identifier: Apache-2.0
#include "taylor_model.hpp"

#include <cmath>

namespace igm {

ScalarFunction ScalarFunction::poly(std::vector<double> coeffs) {
  require(!coeffs.empty(), "poly requires at least one coefficient");
  return ScalarFunction(Kind::Poly, std::move(coeffs), 0.0);
}
ScalarFunction ScalarFunction::exp(double a) { return ScalarFunction(Kind::Exp, {}, a); }
ScalarFunction ScalarFunction::sin(double a) { return ScalarFunction(Kind::Sin, {}, a); }
ScalarFunction ScalarFunction::cos(double a) { return ScalarFunction(Kind::Cos, {}, a); }

double ScalarFunction::taylor_coeff(int ell) const {
  require(ell >= 0, "taylor_coeff: negative degree");
  switch (kind_) {
    case Kind::Poly:
      return ell < static_cast<int>(coeffs_.size()) ? coeffs_[ell] : 0.0;
    case Kind::Exp: {
      // a^ell / ell! via a stable recurrence.
      double c = 1.0;
      for (int k = 1; k <= ell; ++k) c *= a_ / k;
      return c;
    }
    case Kind::Sin: {
      if (ell % 2 == 0) return 0.0;
      double c = 1.0;
      for (int k = 1; k <= ell; ++k) c *= a_ / k;
      return ((ell / 2) % 2 == 0) ? c : -c;  // sign (-1)^((ell-1)/2)
    }
    case Kind::Cos: {
      if (ell % 2 == 1) return 0.0;
      double c = 1.0;
      for (int k = 1; k <= ell; ++k) c *= a_ / k;
      return ((ell / 2) % 2 == 0) ? c : -c;  // sign (-1)^(ell/2)
    }
  }
  throw Error("unreachable scalar kind");
}

double ScalarFunction::eval(double mu) const {
  switch (kind_) {
    case Kind::Poly: {
      double v = 0.0;  // Horner
      for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) v = v * mu + *it;
      return v;
    }
    case Kind::Exp:
      return std::exp(a_ * mu);
    case Kind::Sin:
      return std::sin(a_ * mu);
    case Kind::Cos:
      return std::cos(a_ * mu);
  }
  throw Error("unreachable scalar kind");
}

TaylorMatrixFunction::TaylorMatrixFunction(std::vector<Term> terms, double scale,
                                           bool with_evaluator)
    : terms_(std::move(terms)), scale_(scale), with_evaluator_(with_evaluator) {
  require(!terms_.empty(), "matrix family requires at least one term");
  require(scale_ > 0.0, "scale must be positive");
  n_ = terms_.front().matrix.rows();
  for (const auto& t : terms_) {
    require(t.matrix.rows() == n_ && t.matrix.cols() == n_,
            "all term matrices must be square with matching dimension");
  }
}

TaylorMatrixFunction::TaylorMatrixFunction(const TaylorMatrixFunction& other)
    : n_(other.n_),
      terms_(other.terms_),
      scale_(other.scale_),
      with_evaluator_(other.with_evaluator_) {}

TaylorMatrixFunction::TaylorMatrixFunction(TaylorMatrixFunction&& other) noexcept
    : n_(other.n_),
      terms_(std::move(other.terms_)),
      scale_(other.scale_),
      with_evaluator_(other.with_evaluator_),
      memo_(std::move(other.memo_)) {}

const SparseMat& TaylorMatrixFunction::coeff(int ell) const {
  require(ell >= 0, "coeff: negative degree");
  std::lock_guard<std::mutex> lock(memo_mutex_);
  if (ell >= static_cast<int>(memo_.size())) memo_.resize(ell + 1);
  if (!memo_[ell]) {
    // Assemble the unscaled coefficient first, then apply s^ell as one final
    // entrywise product, so a rescaled family's coefficient equals
    // s^ell * coeff(f, ell) bit for bit.
    SparseMat acc(n_, n_);
    for (const auto& t : terms_) {
      const double c = t.function.taylor_coeff(ell);
      if (c != 0.0) acc += c * t.matrix;
    }
    if (scale_ != 1.0) {
      double s_pow = 1.0;
      for (int k = 0; k < ell; ++k) s_pow *= scale_;
      acc = s_pow * acc;
    }
    acc.makeCompressed();
    memo_[ell] = std::make_unique<const SparseMat>(std::move(acc));
  }
  return *memo_[ell];
}

SparseMat TaylorMatrixFunction::eval(double mu) const {
  require(with_evaluator_, "evaluator unavailable for this family");
  SparseMat acc(n_, n_);
  for (const auto& t : terms_) {
    const double c = t.function.eval(mu);
    if (c != 0.0) acc += c * t.matrix;
  }
  acc.makeCompressed();
  return acc;
}

TaylorMatrixFunction TaylorMatrixFunction::rescaled(double s) const {
  require(s > 0.0, "rescale factor must be positive");
  return TaylorMatrixFunction(terms_, scale_ * s, with_evaluator_);
}

}  // namespace igm
