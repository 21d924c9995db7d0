#pragma once

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "ibcn/block.hpp"
#include "ibcn/errors.hpp"

namespace ibcn {

/// Greedy block selection. Both variants guarantee
/// ||grad restricted to the chosen block|| >= theta * ||grad||
/// with the theta reported by theta_bound.
struct SelectionRule {
  enum class Kind { max_abs_fill, fixed_partition };

  Kind kind = Kind::max_abs_fill;
  Index q = 1;                        // block size for max_abs_fill
  std::vector<BlockIndex> partition;  // blocks for fixed_partition, may overlap

  static SelectionRule max_abs_fill(Index q) {
    SelectionRule r;
    r.kind = Kind::max_abs_fill;
    r.q = q;
    return r;
  }

  static SelectionRule fixed_partition(std::vector<BlockIndex> blocks) {
    SelectionRule r;
    r.kind = Kind::fixed_partition;
    r.partition = std::move(blocks);
    return r;
  }
};

namespace detail {
inline void require_partition_covers(const std::vector<BlockIndex>& partition, Index n) {
  if (partition.empty()) throw InvalidBlockError("selection: empty partition");
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  for (const auto& blk : partition) {
    if (blk.dim() != n) throw InvalidBlockError("selection: partition block dimension mismatch");
    for (Index i : blk.indices()) seen[static_cast<std::size_t>(i)] = 1;
  }
  for (char c : seen)
    if (!c) throw InvalidBlockError("selection: partition does not cover all variables");
}
}  // namespace detail

/// Block containing the largest-magnitude gradient component (ties to the
/// lowest index) plus q-1 further indices sampled uniformly without
/// replacement. Indices of the result are sorted.
inline BlockIndex select_max_abs_fill(const Vector& grad, Index q, std::mt19937_64& rng) {
  const Index n = grad.size();
  if (q < 1 || q > n) throw InvalidBlockError("selection: block size out of range");
  if (grad.norm() == 0.0) throw Error("selection: gradient is zero (stationary point)");

  Index top = 0;
  double top_abs = std::abs(grad[0]);
  for (Index i = 1; i < n; ++i) {
    const double a = std::abs(grad[i]);
    if (a > top_abs) {
      top_abs = a;
      top = i;
    }
  }

  std::vector<Index> chosen;
  chosen.reserve(static_cast<std::size_t>(q));
  chosen.push_back(top);
  if (q > 1) {
    std::vector<Index> pool(static_cast<std::size_t>(n));
    std::iota(pool.begin(), pool.end(), Index{0});
    std::swap(pool[static_cast<std::size_t>(top)], pool[static_cast<std::size_t>(n - 1)]);
    // partial Fisher-Yates over the n-1 remaining indices
    for (Index t = 0; t < q - 1; ++t) {
      std::uniform_int_distribution<Index> pick(t, n - 2);
      const Index j = pick(rng);
      std::swap(pool[static_cast<std::size_t>(t)], pool[static_cast<std::size_t>(j)]);
      chosen.push_back(pool[static_cast<std::size_t>(t)]);
    }
  }
  std::sort(chosen.begin(), chosen.end());
  return BlockIndex(std::move(chosen), n);
}

/// The block of the given family with the largest gradient subvector norm
/// (ties to the earliest block in list order).
inline BlockIndex select_partition_max_norm(const Vector& grad,
                                            const std::vector<BlockIndex>& partition) {
  const Index n = grad.size();
  if (grad.norm() == 0.0) throw Error("selection: gradient is zero (stationary point)");
  detail::require_partition_covers(partition, n);

  std::size_t best = 0;
  double best_sq = -1.0;
  for (std::size_t k = 0; k < partition.size(); ++k) {
    double sq = 0.0;
    for (Index i : partition[k].indices()) sq += grad[i] * grad[i];
    if (sq > best_sq) {
      best_sq = sq;
      best = k;
    }
  }
  return partition[best];
}

/// Guaranteed theta of the rule: (n+1-q)^{-1/2} for max_abs_fill,
/// N^{-1/2} for a family of N blocks.
inline double theta_bound(const SelectionRule& rule, Index n) {
  switch (rule.kind) {
    case SelectionRule::Kind::max_abs_fill:
      if (rule.q < 1 || rule.q > n) throw InvalidBlockError("theta_bound: block size out of range");
      return 1.0 / std::sqrt(static_cast<double>(n + 1 - rule.q));
    case SelectionRule::Kind::fixed_partition:
      detail::require_partition_covers(rule.partition, n);
      return 1.0 / std::sqrt(static_cast<double>(rule.partition.size()));
  }
  throw Error("theta_bound: unknown selection rule");
}

inline BlockIndex select_block(const SelectionRule& rule, const Vector& grad,
                               std::mt19937_64& rng) {
  switch (rule.kind) {
    case SelectionRule::Kind::max_abs_fill:
      return select_max_abs_fill(grad, rule.q, rng);
    case SelectionRule::Kind::fixed_partition:
      return select_partition_max_norm(grad, rule.partition);
  }
  throw Error("select_block: unknown selection rule");
}

}  // namespace ibcn
