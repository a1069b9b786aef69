// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "block_vector.hpp"
#include "inner_solvers.hpp"
#include "taylor_model.hpp"

namespace igm {

/// Result of one preconditioner application in the companion space.
struct KinvApply {
  BlockVector z;        // same active count as the input
  double p_norm = 0.0;  // exactly recomputed inner-residual norm |A0 w - rhs|
  Vec p_first;          // first block of the inner residual (the rest is zero)
  InnerApply inner;
};

/// Applies the (approximate) inverse of the companion stiffness block to a
/// vector with i active blocks [w0, w1, ..., w_{i-1}]: the result is
/// [w~, w1, ..., w_{i-1}] with w~ = A0^{-1}(w0 - sum_{l>=1} A_l w_l) computed
/// by the supplied inner solver at absolute budget eps_inner.
///
/// The inner-residual norm is recomputed with one extra A0 matvec instead of
/// trusting the solver's own estimate; its off-first-block rows vanish by
/// construction because the remaining blocks are copied verbatim.
KinvApply apply_Kinv(const BlockVector& q, const TaylorMatrixFunction& f,
                     InnerSolver& inner, double eps_inner);

/// The action of the companion shift: [z0, ..., z_{i-1}] -> [0, z0, ..., z_{i-1}].
BlockVector shift_down(const BlockVector& z);

/// Composition shift_down(apply_Kinv(...)); grows the active count by one.
KinvApply apply_MKinv(const BlockVector& q, const TaylorMatrixFunction& f,
                      InnerSolver& inner, double eps_inner);

}  // namespace igm
