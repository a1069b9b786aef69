// SPDX-License-Identifier: Apache-2.0
#include "oracle.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SparseLU>

#include <algorithm>

namespace igm::oracle {

ExplicitCompanion build_explicit(const TaylorMatrixFunction& f, const Vec& b, int m,
                                 Index cap) {
  require(m >= 0, "build_explicit: m must be nonnegative");
  const Index n = f.dim();
  const Index dim = (static_cast<Index>(m) + 1) * n;
  require(dim <= cap, "build_explicit: dimension " + std::to_string(dim) +
                          " exceeds the oracle cap " + std::to_string(cap));
  require(b.size() == n, "build_explicit: rhs dimension mismatch");

  ExplicitCompanion out;
  out.m = m;
  out.n = n;
  out.k = Mat::Zero(dim, dim);
  out.m_shift = Mat::Zero(dim, dim);
  out.c = Vec::Zero(dim);
  out.c.head(n) = b;

  for (int l = 0; l <= m; ++l)
    out.k.block(0, static_cast<Index>(l) * n, n, n) = Mat(f.coeff(l));
  for (int l = 1; l <= m; ++l)
    out.k.block(static_cast<Index>(l) * n, static_cast<Index>(l) * n, n, n) =
        Mat::Identity(n, n);
  for (int l = 1; l <= m; ++l)
    out.m_shift.block(static_cast<Index>(l) * n, static_cast<Index>(l - 1) * n, n,
                      n) = Mat::Identity(n, n);
  return out;
}

Mat ExplicitCompanion::k_inverse(const TaylorMatrixFunction& f) const {
  const Index dim = (static_cast<Index>(m) + 1) * n;
  Mat a0_inv = Mat(f.coeff(0)).partialPivLu().inverse();
  Mat inv = Mat::Identity(dim, dim);
  inv.block(0, 0, n, n) = a0_inv;
  for (int l = 1; l <= m; ++l)
    inv.block(0, static_cast<Index>(l) * n, n, n) = -a0_inv * Mat(f.coeff(l));
  return inv;
}

DenseFgmres dense_fgmres(const Mat& k, const Mat& m_shift, const Vec& c, double mu,
                         int j, std::function<Vec(const Vec&)> apply_precond,
                         int gs_passes) {
  const Index dim = k.rows();
  require(m_shift.rows() == dim && c.size() == dim, "dense_fgmres: shape mismatch");
  require(j >= 1, "dense_fgmres: j must be at least 1");

  Eigen::PartialPivLU<Mat> k_lu;
  if (!apply_precond) {
    k_lu.compute(k);
    apply_precond = [&k_lu](const Vec& v) { return Vec(k_lu.solve(v)); };
  }

  DenseFgmres out;
  const double c_norm = c.norm();
  require(c_norm > 0.0, "dense_fgmres: zero right-hand side");
  out.q = Mat::Zero(dim, j + 1);
  out.h = Mat::Zero(j + 1, j);
  out.q.col(0) = c / c_norm;
  Mat ztilde = Mat::Zero(dim, j);

  int completed = 0;
  for (int i = 1; i <= j; ++i) {
    const Vec z = apply_precond(out.q.col(i - 1));
    ztilde.col(i - 1) = z;
    Vec y = m_shift * z;
    Vec h_acc = Vec::Zero(i);
    for (int pass = 0; pass < gs_passes; ++pass) {
      const Vec proj = out.q.leftCols(i).transpose() * y;
      y -= out.q.leftCols(i) * proj;
      h_acc += proj;
    }
    const double beta = y.norm();
    out.h.block(0, i - 1, i, 1) = h_acc;
    out.h(i, i - 1) = beta;
    completed = i;
    if (beta <= 1e-14 * c_norm) {
      out.breakdown = true;
      break;
    }
    out.q.col(i) = y / beta;
  }
  out.q.conservativeResize(Eigen::NoChange, completed + 1);
  out.h.conservativeResize(completed + 1, completed);

  // Shifted least squares for the iterate at each prefix.
  for (int i = 1; i <= completed; ++i) {
    Mat bimat = -mu * out.h.topLeftCorner(i + 1, i);
    for (int kk = 0; kk < i; ++kk) bimat(kk, kk) += 1.0;
    Vec rhs_small = Vec::Zero(i + 1);
    rhs_small[0] = c_norm;
    const Vec w = bimat.colPivHouseholderQr().solve(rhs_small);
    out.iterates.push_back(ztilde.leftCols(i) * w);
  }
  return out;
}

std::vector<std::complex<double>> companion_spectrum(const TaylorMatrixFunction& f,
                                                     int m, Index cap) {
  Vec b = Vec::Ones(f.dim());
  const ExplicitCompanion ec = build_explicit(f, b, m, cap);
  const Mat mk = ec.m_shift * ec.k_inverse(f);
  Eigen::EigenSolver<Mat> es(mk, /*computeEigenvectors=*/false);
  require(es.info() == Eigen::Success, "companion eigensolve failed");
  std::vector<std::complex<double>> vals(es.eigenvalues().size());
  for (Index i = 0; i < es.eigenvalues().size(); ++i) vals[i] = es.eigenvalues()[i];
  std::sort(vals.begin(), vals.end(), [](const auto& a, const auto& b2) {
    return std::abs(a) > std::abs(b2);
  });
  return vals;
}

Vec direct_solve(const TaylorMatrixFunction& f, double mu, const Vec& b) {
  require(b.size() == f.dim(), "direct_solve: rhs dimension mismatch");
  Eigen::SparseMatrix<double> a(f.eval(mu));
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success)
    throw Error("direct_solve: A(mu) singular at mu=" + std::to_string(mu));
  return lu.solve(b);
}

namespace {

std::complex<double> eval_scalar_complex(const ScalarFunction& fn,
                                         std::complex<double> mu) {
  using C = std::complex<double>;
  switch (fn.kind()) {
    case ScalarFunction::Kind::Poly: {
      C v = 0.0;
      const auto& c = fn.poly_coeffs();
      for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * mu + *it;
      return v;
    }
    case ScalarFunction::Kind::Exp:
      return std::exp(fn.arg_scale() * mu);
    case ScalarFunction::Kind::Sin:
      return std::sin(fn.arg_scale() * mu);
    case ScalarFunction::Kind::Cos:
      return std::cos(fn.arg_scale() * mu);
  }
  throw Error("unreachable scalar kind");
}

}  // namespace

CMat eval_complex(const TaylorMatrixFunction& f, std::complex<double> mu,
                  Index cap) {
  require(f.has_evaluator(), "evaluator unavailable for this family");
  require(f.dim() <= cap, "eval_complex: dimension exceeds the oracle cap");
  CMat acc = CMat::Zero(f.dim(), f.dim());
  for (const auto& t : f.terms())
    acc += eval_scalar_complex(t.function, mu) * Mat(t.matrix);
  return acc;
}

CVec direct_solve_complex(const TaylorMatrixFunction& f, std::complex<double> mu,
                          const Vec& b, Index cap) {
  require(b.size() == f.dim(), "direct_solve_complex: rhs dimension mismatch");
  return eval_complex(f, mu, cap).partialPivLu().solve(CVec(b.cast<std::complex<double>>()));
}

CVec evaluate_solution_complex(const Mat& z_first, const Mat& h, double c_norm,
                               double scale, std::complex<double> mu) {
  const int j = static_cast<int>(z_first.cols());
  require(h.rows() == j + 1 && h.cols() == j, "Hessenberg shape mismatch");
  const std::complex<double> nu = mu / scale;
  CMat shifted = -nu * h.cast<std::complex<double>>();
  for (int k = 0; k < j; ++k) shifted(k, k) += 1.0;
  CVec rhs = CVec::Zero(j + 1);
  rhs[0] = c_norm;
  const CVec w = shifted.colPivHouseholderQr().solve(rhs);
  return z_first.cast<std::complex<double>>() * w;
}

double complex_relative_residual(const TaylorMatrixFunction& f, const Vec& b,
                                 const Mat& z_first, const Mat& h, double c_norm,
                                 double scale, std::complex<double> mu, Index cap) {
  const CVec x = evaluate_solution_complex(z_first, h, c_norm, scale, mu);
  const CMat a = eval_complex(f, mu, cap);
  return (a * x - b.cast<std::complex<double>>()).norm() / b.norm();
}

}  // namespace igm::oracle
