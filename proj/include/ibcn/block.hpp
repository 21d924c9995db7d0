#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "ibcn/errors.hpp"

namespace ibcn {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// An ordered set of distinct coordinate indices selecting a block of
/// variables out of an ambient space of dimension n. Indices are 0-based
/// in memory; file formats and logs use 1-based numbering.
class BlockIndex {
public:
  BlockIndex(std::vector<Index> indices, Index n) : idx_(std::move(indices)), n_(n) {
    if (n_ < 1) throw InvalidBlockError("ambient dimension must be >= 1");
    if (idx_.empty()) throw InvalidBlockError("block must contain at least one index");
    if (static_cast<Index>(idx_.size()) > n_)
      throw InvalidBlockError("block larger than ambient dimension");
    for (Index i : idx_) {
      if (i < 0 || i >= n_)
        throw InvalidBlockError("block index " + std::to_string(i + 1) +
                                " out of range [1, " + std::to_string(n_) + "]");
    }
    std::vector<Index> sorted = idx_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw InvalidBlockError("block indices must be distinct");
  }

  static BlockIndex full(Index n) {
    std::vector<Index> all(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
    return BlockIndex(std::move(all), n);
  }

  static BlockIndex single(Index i, Index n) { return BlockIndex({i}, n); }

  Index size() const { return static_cast<Index>(idx_.size()); }
  Index dim() const { return n_; }
  Index operator[](Index j) const { return idx_[static_cast<std::size_t>(j)]; }
  const std::vector<Index>& indices() const { return idx_; }
  bool is_full() const { return size() == n_; }

  bool operator==(const BlockIndex& o) const { return n_ == o.n_ && idx_ == o.idx_; }

private:
  std::vector<Index> idx_;
  Index n_;
};

/// Subvector of x at the block's indices.
inline Vector gather(const Vector& x, const BlockIndex& I) {
  if (x.size() != I.dim())
    throw InvalidBlockError("gather: vector length " + std::to_string(x.size()) +
                            " does not match block ambient dimension " +
                            std::to_string(I.dim()));
  Vector out(I.size());
  for (Index j = 0; j < I.size(); ++j) out[j] = x[I[j]];
  return out;
}

/// Embed a block vector into the ambient space, zeros elsewhere.
inline Vector scatter(const Vector& s, const BlockIndex& I, Index n) {
  if (s.size() != I.size())
    throw InvalidBlockError("scatter: step length " + std::to_string(s.size()) +
                            " does not match block size " + std::to_string(I.size()));
  if (n != I.dim())
    throw InvalidBlockError("scatter: ambient dimension mismatch");
  Vector out = Vector::Zero(n);
  for (Index j = 0; j < I.size(); ++j) out[I[j]] = s[j];
  return out;
}

inline void add_in_block_inplace(Vector& x, const Vector& s, const BlockIndex& I) {
  if (x.size() != I.dim() || s.size() != I.size())
    throw InvalidBlockError("add_in_block: shape mismatch");
  for (Index j = 0; j < I.size(); ++j) x[I[j]] += s[j];
}

/// x + (s embedded at the block's indices); coordinates outside the block
/// are unchanged.
inline Vector add_in_block(const Vector& x, const Vector& s, const BlockIndex& I) {
  Vector out = x;
  add_in_block_inplace(out, s, I);
  return out;
}

inline Matrix gather_submatrix(const Matrix& M, const BlockIndex& I) {
  if (M.rows() != I.dim() || M.cols() != I.dim())
    throw InvalidBlockError("gather_submatrix: matrix shape mismatch");
  Matrix out(I.size(), I.size());
  for (Index a = 0; a < I.size(); ++a)
    for (Index b = 0; b < I.size(); ++b) out(a, b) = M(I[a], I[b]);
  return out;
}

}  // namespace ibcn
