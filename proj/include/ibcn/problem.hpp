#pragma once

#include <cmath>
#include <concepts>
#include <utility>

#include "ibcn/block.hpp"

namespace ibcn {

/// Oracle contract every objective implements: value, full gradient, block
/// gradient and dense symmetric block Hessian, all for a fixed dimension.
/// The block gradient must be exactly the gathered full gradient.
template <class P>
concept BlockObjective = requires(const P& p, const Vector& x, const BlockIndex& I) {
  { p.dimension() } -> std::convertible_to<Index>;
  { p.value(x) } -> std::convertible_to<double>;
  { p.full_gradient(x) } -> std::convertible_to<Vector>;
  { p.block_gradient(x, I) } -> std::convertible_to<Vector>;
  { p.block_hessian(x, I) } -> std::convertible_to<Matrix>;
};

template <class P>
concept HasHessianDiagonal = requires(const P& p, const Vector& x, const BlockIndex& I) {
  { p.block_hessian_diagonal(x, I) } -> std::convertible_to<Vector>;
};

/// Diagonal of the block Hessian, through the objective's fast path when it
/// has one.
template <BlockObjective P>
Vector block_hessian_diagonal(const P& p, const Vector& x, const BlockIndex& I) {
  if constexpr (HasHessianDiagonal<P>) {
    return p.block_hessian_diagonal(x, I);
  } else {
    return p.block_hessian(x, I).diagonal();
  }
}

// How many accepted block updates a session performs before rebuilding its
// incremental caches from scratch.
inline constexpr long long kSessionRefreshInterval = 1000;

/// Per-run evaluation state that tracks the iterate and serves trial values
/// for block steps. This generic version recomputes everything through the
/// plain oracles; objectives with exploitable structure provide their own
/// session type with the same surface.
template <BlockObjective P>
class GenericSession {
public:
  GenericSession(const P& problem, Vector x0)
      : problem_(&problem), x_(std::move(x0)), f_(problem.value(x_)) {}

  const Vector& x() const { return x_; }
  double value() const { return f_; }

  const Vector& full_gradient() {
    if (!grad_valid_) {
      grad_ = problem_->full_gradient(x_);
      grad_valid_ = true;
    }
    return grad_;
  }

  Matrix block_hessian(const BlockIndex& I) const { return problem_->block_hessian(x_, I); }

  Vector block_hessian_diagonal(const BlockIndex& I) const {
    return ibcn::block_hessian_diagonal(*problem_, x_, I);
  }

  double trial_value(const BlockIndex& I, const Vector& s) const {
    return problem_->value(add_in_block(x_, s, I));
  }

  void accept(const BlockIndex& I, const Vector& s, double f_trial) {
    add_in_block_inplace(x_, s, I);
    f_ = f_trial;
    grad_valid_ = false;
  }

  void refresh() { grad_valid_ = false; }  // nothing incremental to rebuild

private:
  const P* problem_;
  Vector x_;
  double f_;
  Vector grad_;
  bool grad_valid_ = false;
};

template <class P>
concept HasSession = requires { typename P::Session; };

template <BlockObjective P>
auto make_session(const P& problem, Vector x0) {
  if constexpr (HasSession<P>) {
    return typename P::Session(problem, std::move(x0));
  } else {
    return GenericSession<P>(problem, std::move(x0));
  }
}

template <BlockObjective P>
using SessionType = decltype(make_session(std::declval<const P&>(), Vector{}));

}  // namespace ibcn
