// SPDX-License-Identifier: Apache-2.0
#include "hessenberg_ls.hpp"

#include <Eigen/SVD>

#include <cmath>

namespace igm {

Mat shifted_matrix(const Mat& H, int i, double mu) {
  require(i >= 1, "shifted_matrix: empty basis");
  require(H.rows() >= i + 1 && H.cols() >= i, "shifted_matrix: Hessenberg too small");
  Mat b = -mu * H.topLeftCorner(i + 1, i);
  for (int k = 0; k < i; ++k) b(k, k) += 1.0;
  return b;
}

HessLs solve_shifted_ls(const Mat& H, int i, double mu, double c_norm) {
  Mat b = shifted_matrix(H, i, mu);
  const Mat b0 = b;
  Vec g = Vec::Zero(i + 1);
  g[0] = c_norm;

  // Givens sweep down the subdiagonal; b is Hessenberg so one rotation per
  // column suffices.
  for (int k = 0; k < i; ++k) {
    const double x = b(k, k), y = b(k + 1, k);
    const double r = std::hypot(x, y);
    if (r == 0.0) continue;
    const double c = x / r, s = y / r;
    for (int j = k; j < i; ++j) {
      const double t1 = b(k, j), t2 = b(k + 1, j);
      b(k, j) = c * t1 + s * t2;
      b(k + 1, j) = -s * t1 + c * t2;
    }
    const double t1 = g[k], t2 = g[k + 1];
    g[k] = c * t1 + s * t2;
    g[k + 1] = -s * t1 + c * t2;
  }

  HessLs out;
  out.w = Vec::Zero(i);
  const double pivot_tol = 1e-14 * (b.diagonal().cwiseAbs().maxCoeff() + 1.0);
  for (int k = i - 1; k >= 0; --k) {
    double acc = g[k];
    for (int j = k + 1; j < i; ++j) acc -= b(k, j) * out.w[j];
    if (std::abs(b(k, k)) <= pivot_tol) {
      out.rank_deficient = true;
      out.w[k] = 0.0;
    } else {
      out.w[k] = acc / b(k, k);
    }
  }
  out.residual = -b0 * out.w;
  out.residual[0] += c_norm;
  out.residual_norm = out.residual.norm();
  return out;
}

double sigma_min_shifted(const Mat& H, int i, double mu) {
  Eigen::JacobiSVD<Mat> svd(shifted_matrix(H, i, mu));
  return svd.singularValues().minCoeff();
}

}  // namespace igm
