// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "companion.hpp"
#include "oracle.hpp"
#include "problem_gallery.hpp"

using namespace igm;

namespace {

/// Inner map that proposes w = rhs (an exact A0^{-1} only when A0 = I).
class PassthroughInner : public InnerSolver {
 public:
  explicit PassthroughInner(SparseMat a) : a_(std::move(a)) {}
  InnerApply apply(const Vec& rhs, double) override {
    return {rhs, 0, true, "passthrough", 0.0};
  }
  const SparseMat& matrix() const override { return a_; }

 private:
  SparseMat a_;
};

SparseMat dense_to_sparse(const Mat& d) {
  SparseMat s = d.sparseView();
  s.makeCompressed();
  return s;
}

TaylorMatrixFunction random_poly_family(Index n, int degree, uint64_t seed) {
  Rng rng(seed);
  std::vector<SparseMat> coeffs;
  for (int l = 0; l <= degree; ++l) {
    Mat d(n, n);
    for (Index r = 0; r < n; ++r)
      for (Index c = 0; c < n; ++c) d(r, c) = rng.uniform_sym();
    if (l == 0) d += 3.0 * Mat::Identity(n, n);  // keep A0 well conditioned
    coeffs.push_back(dense_to_sparse(d));
  }
  return gallery::family_from_coefficients(std::move(coeffs));
}

BlockVector random_block_vector(Index n, int blocks, Rng& rng) {
  BlockVector q(n);
  for (int k = 0; k < blocks; ++k) {
    Vec v(n);
    for (Index i = 0; i < n; ++i) v[i] = rng.uniform_sym();
    q.append_block(v);
  }
  return q;
}

}  // namespace

TEST_CASE("block vector basics") {
  BlockVector v(3);
  CHECK(v.active_blocks() == 0);
  v.append_block(Vec::Ones(3));
  v.append_zero_block();
  CHECK(v.active_blocks() == 2);
  const Vec dense = v.to_dense(5);
  CHECK(dense.size() == 15);
  CHECK(dense.head(3).sum() == 3.0);
  for (Index i = 3; i < 15; ++i) CHECK(dense[i] == 0.0);
  CHECK_THROWS_AS(v.append_block(Vec::Ones(4)), Error);
  CHECK_THROWS_AS(v.block(2), Error);
}

TEST_CASE("single-block application reduces to an inner solve") {
  const auto p = gallery::time_delay(40, 3, 21);
  LuInnerSolver lu(p.family.coeff(0));
  const Vec q0 = p.b / p.b.norm();
  const auto r = apply_Kinv(BlockVector::from_block(q0), p.family, lu, 0.0);
  CHECK(r.z.active_blocks() == 1);
  CHECK((Vec(r.z.block(0)) - lu.solve(q0)).norm() == 0.0);
  CHECK(r.p_norm <= 1e-12 * q0.norm());

  const auto mk = apply_MKinv(BlockVector::from_block(q0), p.family, lu, 0.0);
  CHECK(mk.z.active_blocks() == 2);
  CHECK(Vec(mk.z.block(0)).norm() == 0.0);
  CHECK((Vec(mk.z.block(1)) - lu.solve(q0)).norm() == 0.0);
}

TEST_CASE("constant family with passthrough inner keeps the input") {
  // A(mu) = A0 only; proposing w = rhs makes z = q and p = (A0 - I) w0.
  std::vector<SparseMat> coeffs;
  Mat a0 = 2.0 * Mat::Identity(5, 5);
  a0(0, 3) = 0.5;
  coeffs.push_back(dense_to_sparse(a0));
  const auto f = gallery::family_from_coefficients(std::move(coeffs));
  PassthroughInner inner(f.coeff(0));

  Rng rng(3);
  BlockVector q = random_block_vector(5, 3, rng);
  const auto r = apply_Kinv(q, f, inner, 1e30);
  for (int k = 0; k < 3; ++k)
    CHECK((Vec(r.z.block(k)) - Vec(q.block(k))).norm() == 0.0);
  const Vec w0 = q.block(0);
  CHECK(r.p_norm ==
        doctest::Approx((Mat(f.coeff(0)) * w0 - w0).norm()).epsilon(1e-14));
}

TEST_CASE("structured application matches the explicit inverse") {
  const Index n = 6;
  const int m = 8;
  const auto f = random_poly_family(n, m, 77);
  LuInnerSolver lu(f.coeff(0));
  Rng rng(5);
  const BlockVector q = random_block_vector(n, 4, rng);

  const auto ec = oracle::build_explicit(f, Vec::Ones(n), m);
  const Mat kinv = ec.k_inverse(f);

  const auto r = apply_Kinv(q, f, lu, 0.0);
  const Vec structured = r.z.to_dense(m + 1);
  const Vec explicit_vec = kinv * q.to_dense(m + 1);
  CHECK((structured - explicit_vec).norm() <= 1e-13 * explicit_vec.norm());

  const auto mk = apply_MKinv(q, f, lu, 0.0);
  const Vec lhs = mk.z.to_dense(m + 1);
  const Vec rhs = ec.m_shift * explicit_vec;
  CHECK((lhs - rhs).norm() <= 1e-13 * rhs.norm());
}

TEST_CASE("shift_down is the companion shift") {
  Rng rng(11);
  BlockVector z = random_block_vector(4, 3, rng);
  const BlockVector y = shift_down(z);
  CHECK(y.active_blocks() == 4);
  CHECK(Vec(y.block(0)).norm() == 0.0);
  for (int k = 0; k < 3; ++k)
    CHECK((Vec(y.block(k + 1)) - Vec(z.block(k))).norm() == 0.0);

  const BlockVector yy = shift_down(shift_down(BlockVector::from_block(Vec::Ones(4))));
  CHECK(yy.active_blocks() == 3);
  CHECK(Vec(yy.block(0)).norm() == 0.0);
  CHECK(Vec(yy.block(1)).norm() == 0.0);
  CHECK(Vec(yy.block(2)).sum() == 4.0);

  // Dense comparison against the explicit shift is exact.
  const auto f = random_poly_family(4, 5, 13);
  const auto ec = oracle::build_explicit(f, Vec::Ones(4), 5);
  const Vec dense = ec.m_shift * z.to_dense(6);
  CHECK((dense - y.to_dense(6)).norm() == 0.0);
}

TEST_CASE("padding with explicit zero blocks does not change the result") {
  const auto f = random_poly_family(5, 6, 31);
  LuInnerSolver lu(f.coeff(0));
  Rng rng(17);
  BlockVector q = random_block_vector(5, 3, rng);
  BlockVector padded = q;
  padded.append_zero_block();
  padded.append_zero_block();

  const auto r1 = apply_Kinv(q, f, lu, 0.0);
  const auto r2 = apply_Kinv(padded, f, lu, 0.0);
  CHECK(r2.z.active_blocks() == 5);
  for (int k = 0; k < 3; ++k)
    CHECK((Vec(r2.z.block(k)) - Vec(r1.z.block(k))).norm() == 0.0);
  CHECK(Vec(r2.z.block(3)).norm() == 0.0);
  CHECK(Vec(r2.z.block(4)).norm() == 0.0);
  CHECK(r2.p_norm == doctest::Approx(r1.p_norm).epsilon(1e-14));
}

TEST_CASE("degenerate inputs are rejected") {
  const auto f = random_poly_family(4, 2, 1);
  LuInnerSolver lu(f.coeff(0));
  CHECK_THROWS_AS(apply_Kinv(BlockVector(4), f, lu, 0.0), Error);
  CHECK_THROWS_AS(apply_Kinv(BlockVector::from_block(Vec::Ones(3)), f, lu, 0.0),
                  Error);
}
