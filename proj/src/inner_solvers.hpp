// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <optional>
#include <string>

#include "linalg.hpp"
#include "taylor_model.hpp"

namespace igm {

/// Outcome of one approximate application of A0^{-1}.
struct InnerApply {
  Vec w;
  int iterations = 0;          // inner iterations spent (0 for direct/identity)
  bool converged = true;       // promise |A0 w - rhs| <= eps_abs held
  std::string kind;
  double reported_residual = 0.0;  // solver's own estimate; callers re-verify
  /// Exact defect A0 w - rhs when the solver can form it without the
  /// cancellation of re-multiplying through A0 (defect-space constructions);
  /// empty otherwise, in which case the caller recomputes it by one matvec.
  Vec defect;
};

/// Pluggable approximation of the action of A0^{-1}. On success the promise is
/// |A0 w - rhs| <= eps_abs (equivalently a relative tolerance eps_abs/|rhs|).
/// The caller recomputes the defect exactly regardless.
class InnerSolver {
 public:
  virtual ~InnerSolver() = default;
  virtual InnerApply apply(const Vec& rhs, double eps_abs) = 0;
  virtual const SparseMat& matrix() const = 0;
  /// Total A0 matvecs spent so far, verification products included.
  virtual long matvec_count() const { return 0; }
};

enum class BicgstabFlag { Converged, MaxIterations, Breakdown };

struct BicgstabResult {
  Vec w;
  double achieved_rel_res = 0.0;  // true residual, recomputed
  int iterations = 0;
  BicgstabFlag flag = BicgstabFlag::Converged;
  long matvecs = 0;
};

/// Unpreconditioned BiCGSTAB (optional Jacobi scaling) with an explicit
/// true-residual check before success is reported.
BicgstabResult bicgstab_solve(const SparseMat& a, const Vec& rhs, double tol_rel,
                              int max_it, bool jacobi = false);

/// Proposes w = rhs as the preconditioner application and accepts only when
/// the induced defect |(A0 - I) rhs| fits the inner budget; refusal is a
/// normal outcome and the engine falls back to the configured iterative
/// solver.
std::optional<Vec> identity_substitute(const SparseMat& a, const Vec& rhs,
                                       double eps_inner);

struct InnerConfig {
  enum class Kind { Lu, Bicgstab, IdentityThenBicgstab, Perturbed };
  Kind kind = Kind::Lu;
  int max_it = 10000;
  uint64_t seed = 1;
  bool jacobi = false;
  /// Use the previous iteration's budget as the BiCGSTAB tolerance (a
  /// stricter, lagged target); the engine's bound still applies.
  bool lagged_tol = false;
  /// Saturated perturbations never exceed this multiple of |rhs|. Late
  /// iterations request budgets like eps/|r~| that grow without bound once
  /// the run has converged; injecting defects that large only destroys the
  /// arithmetic, so the target is clamped (still within the budget).
  double perturb_cap_rel = 1e3;

  static InnerConfig lu() { return {}; }
  static InnerConfig bicgstab(int max_it = 10000, bool lagged = false);
  static InnerConfig identity_then_bicgstab(int max_it = 10000);
  static InnerConfig perturbed(uint64_t seed);
};

/// Builds the configured solver for the family's A0 = coeff(0). Singularity of
/// A0 is detected here (factorization-backed kinds) or on first use.
std::unique_ptr<InnerSolver> make_inner_solver(const TaylorMatrixFunction& f,
                                               const InnerConfig& cfg);

/// Exact solver with a cached sparse LU; also usable standalone. The
/// factorization is immutable after construction, so solve/apply are safe
/// from multiple threads; the iterative solvers below carry per-call state
/// and expect one caller at a time.
class LuInnerSolver : public InnerSolver {
 public:
  explicit LuInnerSolver(const SparseMat& a);
  ~LuInnerSolver() override;
  InnerApply apply(const Vec& rhs, double eps_abs) override;
  Vec solve(const Vec& rhs) const;
  const SparseMat& matrix() const override { return a_; }

 private:
  SparseMat a_;
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Exact solve plus a seeded random defect scaled so the recomputed inner
/// residual |A0 w - rhs| hits the requested budget exactly (clamped at
/// cap_rel * |rhs|).
class PerturbedExactSolver : public InnerSolver {
 public:
  PerturbedExactSolver(const SparseMat& a, uint64_t seed, double cap_rel = 1e3);
  InnerApply apply(const Vec& rhs, double eps_abs) override;
  const SparseMat& matrix() const override { return lu_.matrix(); }
  long matvec_count() const override { return matvecs_; }

 private:
  LuInnerSolver lu_;
  Rng rng_;
  double cap_rel_;
  long matvecs_ = 0;
};

class BicgstabInnerSolver : public InnerSolver {
 public:
  BicgstabInnerSolver(const SparseMat& a, const InnerConfig& cfg, bool try_identity);
  InnerApply apply(const Vec& rhs, double eps_abs) override;
  const SparseMat& matrix() const override { return a_; }
  long matvec_count() const override { return matvecs_; }

 private:
  SparseMat a_;
  InnerConfig cfg_;
  bool try_identity_;
  double prev_eps_abs_ = -1.0;
  long matvecs_ = 0;
};

}  // namespace igm
