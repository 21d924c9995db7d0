#pragma once

#include <chrono>
#include <cmath>
#include <random>
#include <string>
#include <utility>

#include "ibcn/problem.hpp"
#include "ibcn/selection.hpp"
#include "ibcn/solver.hpp"
#include "ibcn/trace.hpp"

namespace ibcn {

struct ArmijoOptions {
  double initial_step = 1.0;
  double backtrack = 0.5;
  double c = 1e-4;
  int max_backtracks = 50;

  void validate() const {
    if (!(initial_step > 0)) throw ConfigError("armijo: initial step must be positive");
    if (!(backtrack > 0 && backtrack < 1)) throw ConfigError("armijo: backtrack factor in (0,1)");
    if (!(c > 0 && c < 1)) throw ConfigError("armijo: sufficient-decrease constant in (0,1)");
    if (max_backtracks < 0) throw ConfigError("armijo: max_backtracks must be >= 0");
  }
};

class LineSearchError : public Error {
public:
  using Error::Error;
};

/// Steepest descent direction on the block.
inline Vector bcd1_direction(const Vector& g) {
  if (g.norm() == 0.0) throw Error("bcd1_direction: zero gradient");
  return -g;
}

/// Diagonally scaled steepest descent: each component divided by the block
/// Hessian diagonal clamped to [1e-2, 1e9].
inline Vector bcd2_direction(const Vector& g, const Vector& hdiag) {
  if (g.norm() == 0.0) throw Error("bcd2_direction: zero gradient");
  if (g.size() != hdiag.size()) throw Error("bcd2_direction: size mismatch");
  Vector d(g.size());
  for (Index j = 0; j < g.size(); ++j)
    d[j] = -g[j] / std::clamp(hdiag[j], 1e-2, 1e9);
  return d;
}

struct ArmijoResult {
  double alpha = 0.0;
  double f_new = 0.0;
  int backtracks = 0;
};

/// Largest step in {1, b, b^2, ...} satisfying
/// f(x + alpha d on the block) <= f_curr + c alpha g'd.
template <class Session>
ArmijoResult armijo_search(Session& session, const BlockIndex& I, const Vector& d,
                           double f_curr, const Vector& g, const ArmijoOptions& opts) {
  opts.validate();
  const double slope = g.dot(d);
  if (!(slope < 0)) throw Error("armijo_search: not a descent direction");
  double alpha = opts.initial_step;
  for (int bt = 0; bt <= opts.max_backtracks; ++bt) {
    const double f_new = session.trial_value(I, alpha * d);
    if (std::isfinite(f_new) && f_new <= f_curr + opts.c * alpha * slope)
      return ArmijoResult{alpha, f_new, bt};
    alpha *= opts.backtrack;
  }
  throw LineSearchError("armijo_search: no acceptable step within " +
                        std::to_string(opts.max_backtracks) + " backtracks");
}

enum class BcdVariant { first_order, diag_second_order };

inline const char* bcd_variant_name(BcdVariant v) {
  return v == BcdVariant::first_order ? "bcd1" : "bcd2";
}

/// Greedy block coordinate descent baselines sharing the selection rule and
/// trace schema of the cubic Newton solver. The sigma column is written
/// as 0 since these methods carry no regularization weight.
template <BlockObjective P>
class GreedyBcd {
public:
  GreedyBcd(const P& problem, Vector x0, SolverConfig cfg, BcdVariant variant,
            ArmijoOptions armijo = {})
      : cfg_(std::move(cfg)),
        armijo_(armijo),
        variant_(variant),
        session_(make_session(problem, std::move(x0))),
        rng_(detail::mix_seed(cfg_.seed)),
        start_(std::chrono::steady_clock::now()) {
    cfg_.validate();
    armijo_.validate();
    if (!std::isfinite(session_.value()))
      throw SolverAbort("objective not finite at the starting point");
  }

  const Vector& x() const { return session_.x(); }
  double f() const { return session_.value(); }
  long long iterations_done() const { return k_; }
  double grad_norm() { return session_.full_gradient().norm(); }
  bool done() { return grad_norm() <= cfg_.grad_tol; }

  IterRecord step() {
    IterRecord rec;
    rec.k = k_;
    rec.f_before = session_.value();

    const Vector& gfull = session_.full_gradient();
    if (!gfull.allFinite()) throw SolverAbort("gradient not finite at iteration " + std::to_string(k_));
    rec.grad_norm = gfull.norm();

    rec.block = select_block(cfg_.selection, gfull, rng_);
    const Vector g_block = gather(gfull, rec.block);
    rec.block_grad_norm = g_block.norm();

    Vector d = variant_ == BcdVariant::first_order
                   ? bcd1_direction(g_block)
                   : bcd2_direction(g_block, session_.block_hessian_diagonal(rec.block));
    try {
      const ArmijoResult ls = armijo_search(session_, rec.block, d, rec.f_before, g_block, armijo_);
      rec.step = ls.alpha * d;
      rec.step_norm = rec.step.norm();
      rec.inner_iters = ls.backtracks;
      session_.accept(rec.block, rec.step, ls.f_new);
      rec.success = true;
    } catch (const LineSearchError&) {
      rec.success = false;  // zero step, x unchanged
    }

    rec.f_after = session_.value();
    rec.block_grad_norm_after =
        rec.success ? gather(session_.full_gradient(), rec.block).norm() : rec.block_grad_norm;
    ++k_;
    return rec;
  }

  Trace run() {
    Trace trace;
    trace.meta.solver = bcd_variant_name(variant_);
    trace.meta.seed = cfg_.seed;
    trace.meta.q = cfg_.selection.kind == SelectionRule::Kind::max_abs_fill
                       ? cfg_.selection.q
                       : static_cast<Index>(cfg_.selection.partition.size());
    trace.rows.reserve(static_cast<std::size_t>(cfg_.max_iters));
    while (k_ < cfg_.max_iters && !done()) {
      const IterRecord rec = step();
      trace.rows.push_back(TraceRow{rec.k, rec.f_before, rec.grad_norm, rec.block_grad_norm,
                                    0.0, rec.success ? 1.0 : 0.0, elapsed()});
    }
    return trace;
  }

  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

private:
  SolverConfig cfg_;
  ArmijoOptions armijo_;
  BcdVariant variant_;
  SessionType<P> session_;
  long long k_ = 0;
  std::mt19937_64 rng_;
  std::chrono::steady_clock::time_point start_;
};

template <BlockObjective P>
Trace run_baseline(const P& problem, const Vector& x0, const SolverConfig& cfg,
                   BcdVariant variant, const ArmijoOptions& armijo = {}) {
  GreedyBcd<P> solver(problem, x0, cfg, variant, armijo);
  return solver.run();
}

}  // namespace ibcn
