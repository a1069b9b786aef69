// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "linalg.hpp"
#include "taylor_model.hpp"

namespace igm::gallery {

/// Transfer-function family A(mu) = -mu*I + A0 + A1*exp(-mu) of a time-delay
/// system, with seeded random banded A0, A1. The constituent matrices are
/// exposed for tests and the closed-form eigenvalue cross-checks.
struct DelayProblem {
  TaylorMatrixFunction family;
  Vec b;  // seeded random, normalized to unit length
  SparseMat a0;
  SparseMat a1;
};
DelayProblem time_delay(int n, int bandwidth, uint64_t seed);

/// Finite-difference Helmholtz-type family on the unit square with Dirichlet
/// boundary: A(mu) = A0 + mu*A1 + 2 mu^2 A2 + mu^3 A3 + sin(mu) A4, where A0
/// is the 5-point Laplacian and A1..A4 diagonal samplings of the material
/// coefficients; the load comes from h(x) = exp(-alpha x1).
struct HelmholtzProblem {
  TaylorMatrixFunction family;
  Vec b;
  SparseMat a0, a1, a2, a3, a4;
  int grid = 0;
  double alpha = 0.0;
};
HelmholtzProblem helmholtz_fd(int grid_points_per_side, double alpha = 30.0);

/// Loads a family from a JSON manifest: {n, terms: [{matrix_path, function:
/// {kind, params}}], scale, rhs_path?}. Matrices are Matrix Market files;
/// functions come from the closed set {poly, exp, sin, cos}. Without an
/// rhs_path the right-hand side defaults to the normalized all-ones vector.
std::pair<TaylorMatrixFunction, Vec> from_manifest(const std::string& path);

/// A family whose terms are plain monomials: A(mu) = sum_l coeffs[l] mu^l.
TaylorMatrixFunction family_from_coefficients(std::vector<SparseMat> coeffs);

}  // namespace igm::gallery
