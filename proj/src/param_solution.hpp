// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "linalg.hpp"
#include "taylor_model.hpp"

namespace igm {

/// The compact parameterized approximation x~(mu) produced by a run: the
/// first-block rows of the preconditioned basis plus the Hessenberg. Each
/// evaluation solves one small shifted least-squares problem, so the object
/// is cheap to query for many parameter values and never mutates.
class ParameterizedSolution {
 public:
  ParameterizedSolution(Mat z_first, Mat h, double c_norm, double scale,
                        double mu_ref, double eps, bool converged);

  Index dim() const { return z_first_.rows(); }
  int iterations() const { return static_cast<int>(z_first_.cols()); }
  const Mat& hessenberg() const { return h_; }
  const Mat& z_first() const { return z_first_; }
  double c_norm() const { return c_norm_; }
  double scale() const { return scale_; }
  double mu_ref() const { return mu_ref_; }
  double eps() const { return eps_; }
  bool converged() const { return converged_; }

  /// x~(mu) = Z_first * argmin | (I_ - (mu/s) H_) w - e1 |b| |.
  /// Rank deficiency (1/mu hitting a Ritz value) throws unless a flag pointer
  /// is supplied, in which case the minimum-norm style solution is returned.
  Vec evaluate(double mu, bool* rank_deficient = nullptr) const;

  /// Same, restricted to the leading i columns (the iterate after i steps).
  Vec evaluate_prefix(int i, double mu, bool* rank_deficient = nullptr) const;

  /// |A(mu) x~(mu) - b| / |b| via one closed-form evaluation and matvec.
  double true_relative_residual(double mu, const TaylorMatrixFunction& f,
                                const Vec& b) const;

  struct SweepRow {
    double mu = 0.0;
    double rel_res = 0.0;
    bool ok = true;
    std::string error;
  };

  /// Independent evaluations, rows ordered as the input; failures are
  /// recorded per row and the sweep continues. threads <= 0 picks a default.
  std::vector<SweepRow> sweep(const std::vector<double>& mus,
                              const TaylorMatrixFunction& f, const Vec& b,
                              int threads = 0) const;

  void save(const std::string& path) const;
  static ParameterizedSolution load(const std::string& path);

  /// Optional provenance carried inside the container so a saved solution can
  /// be swept without re-specifying the problem: a problem-descriptor JSON
  /// snippet and the right-hand side.
  std::string problem_json;
  Vec rhs;

 private:
  Mat z_first_;  // n x j
  Mat h_;        // (j+1) x j
  double c_norm_;
  double scale_;
  double mu_ref_;
  double eps_;
  bool converged_;
};

}  // namespace igm
