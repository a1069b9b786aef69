// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "linalg.hpp"

namespace igm {

/// A vector in the companion space stored as its finitely many active
/// length-n blocks over an implicit infinite tail of zeros. The tail is
/// structural: it is never materialized, and converting to a dense vector of
/// any larger length appends exact zeros.
///
/// Blocks live in one flat contiguous buffer (grown geometrically by the
/// underlying std::vector) so dot products and axpy updates stream linearly.
class BlockVector {
 public:
  explicit BlockVector(Index block_size) : n_(block_size) {
    require(block_size > 0, "block size must be positive");
  }

  static BlockVector from_block(const Vec& first) {
    BlockVector v(first.size());
    v.append_block(first);
    return v;
  }

  Index block_size() const { return n_; }
  int active_blocks() const { return static_cast<int>(data_.size() / n_); }

  Eigen::Map<const Vec> block(int k) const {
    require(k >= 0 && k < active_blocks(), "block index out of range");
    return Eigen::Map<const Vec>(data_.data() + static_cast<size_t>(k) * n_, n_);
  }
  Eigen::Map<Vec> block(int k) {
    require(k >= 0 && k < active_blocks(), "block index out of range");
    return Eigen::Map<Vec>(data_.data() + static_cast<size_t>(k) * n_, n_);
  }

  void append_block(const Vec& b) {
    require(b.size() == n_, "mismatched block size");
    data_.insert(data_.end(), b.data(), b.data() + n_);
  }
  void append_zero_block() { data_.resize(data_.size() + n_, 0.0); }
  void reserve_blocks(int k) { data_.reserve(static_cast<size_t>(k) * n_); }

  Eigen::Map<const Vec> flat() const {
    return Eigen::Map<const Vec>(data_.data(), static_cast<Index>(data_.size()));
  }
  Eigen::Map<Vec> flat() {
    return Eigen::Map<Vec>(data_.data(), static_cast<Index>(data_.size()));
  }

  double norm() const { return flat().norm(); }

  /// Inner product; the shorter vector's zero tail contributes nothing.
  double dot(const BlockVector& other) const {
    require(n_ == other.n_, "mismatched block size");
    const Index len = std::min(flat().size(), other.flat().size());
    if (len == 0) return 0.0;
    return flat().head(len).dot(other.flat().head(len));
  }

  /// this += alpha * other; requires other.active_blocks() <= active_blocks().
  void add_scaled(const BlockVector& other, double alpha) {
    require(n_ == other.n_, "mismatched block size");
    require(other.active_blocks() <= active_blocks(),
            "add_scaled would extend the active range");
    flat().head(other.flat().size()) += alpha * other.flat();
  }

  void scale(double alpha) { flat() *= alpha; }

  /// Dense copy padded with exact zeros to total_blocks blocks.
  Vec to_dense(int total_blocks) const {
    require(total_blocks >= active_blocks(), "to_dense: fewer blocks than active");
    Vec out = Vec::Zero(static_cast<Index>(total_blocks) * n_);
    out.head(flat().size()) = flat();
    return out;
  }

 private:
  Index n_;
  std::vector<double> data_;
};

}  // namespace igm
