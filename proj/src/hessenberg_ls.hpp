// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "linalg.hpp"

namespace igm {

struct HessLs {
  Vec w;                       // minimizer, length i
  double residual_norm = 0.0;  // | e1*c_norm - B w |
  Vec residual;                // the (i+1)-vector e1*c_norm - B w
  bool rank_deficient = false;
};

/// Minimizes | (I_ - mu*H_) w - e1*c_norm | over w, where I_ is the
/// (i+1) x i identity with an extra zero row and H_ the leading (i+1) x i
/// block of the stored Hessenberg. Givens QR on the Hessenberg shape, O(i^2).
///
/// A vanishing R pivot (possible only when 1/mu hits a Ritz value) is
/// flagged and the corresponding component is dropped, giving a minimum-norm
/// style solution.
HessLs solve_shifted_ls(const Mat& H, int i, double mu, double c_norm);

/// Smallest singular value of (I_ - mu*H_) for the strict tolerance policy.
double sigma_min_shifted(const Mat& H, int i, double mu);

/// Builds the dense (i+1) x i matrix I_ - mu*H_ from the stored Hessenberg.
Mat shifted_matrix(const Mat& H, int i, double mu);

}  // namespace igm
