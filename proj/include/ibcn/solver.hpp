#pragma once

#include <cassert>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <utility>

#include "ibcn/cubic_model.hpp"
#include "ibcn/problem.hpp"
#include "ibcn/selection.hpp"
#include "ibcn/subsolver.hpp"
#include "ibcn/trace.hpp"

namespace ibcn {

struct SolverConfig {
  double sigma0 = 1.0;
  double sigma_min = 1.0;
  double eta1 = 0.1;
  double eta2 = 0.1;
  double gamma1 = 1.0;
  double gamma2 = 2.0;
  double gamma3 = 2.0;
  double tau = 1.0;
  double beta = 0.5;
  long long max_iters = 10000;
  double grad_tol = 0.0;  // 0 keeps iterating until the gradient is exactly zero
  SelectionRule selection;
  std::uint64_t seed = 0;

  // Tuning of the inner cubic solve; tau and beta above are authoritative.
  int subsolver_max_iters = 500;
  double subsolver_bb_min = 1e-10;
  double subsolver_bb_max = 1e10;
  int subsolver_window = 10;
  bool subsolver_exact_1d = true;

  SubsolverOptions subsolver_options() const {
    SubsolverOptions o;
    o.tau = tau;
    o.beta = beta;
    o.max_inner_iters = subsolver_max_iters;
    o.bb_step_min = subsolver_bb_min;
    o.bb_step_max = subsolver_bb_max;
    o.nonmonotone_window = subsolver_window;
    o.exact_1d = subsolver_exact_1d;
    return o;
  }

  void validate() const {
    if (!(sigma_min > 0)) throw ConfigError("sigma_min must be positive");
    if (!(sigma0 >= sigma_min)) throw ConfigError("sigma0 must be >= sigma_min");
    if (!(eta1 > 0 && eta1 <= eta2 && eta2 < 1))
      throw ConfigError("need 0 < eta1 <= eta2 < 1");
    if (!(gamma1 > 0 && gamma1 <= 1)) throw ConfigError("need gamma1 in (0,1]");
    if (!(gamma2 > 1 && gamma2 <= gamma3)) throw ConfigError("need 1 < gamma2 <= gamma3");
    if (!(tau >= 0)) throw ConfigError("tau must be >= 0");
    if (!(beta > 0 && beta < 1)) throw ConfigError("beta must be in (0,1)");
    if (max_iters < 0) throw ConfigError("max_iters must be >= 0");
    if (!(grad_tol >= 0)) throw ConfigError("grad_tol must be >= 0");
    subsolver_options().validate();
  }
};

/// Decrease ratio: actual objective decrease over quadratic model decrease.
inline double compute_rho(double f_curr, double f_trial, double q_decrease) {
  if (!(q_decrease > 0)) throw Error("compute_rho: nonpositive model decrease");
  return (f_curr - f_trial) / q_decrease;
}

/// Trust-region-style update of the cubic weight, resolved to the lower
/// endpoint of each admissible interval.
inline double update_sigma(double sigma, double rho, const SolverConfig& cfg) {
  if (rho >= cfg.eta2) return std::max(cfg.sigma_min, cfg.gamma1 * sigma);
  if (rho >= cfg.eta1) return sigma;
  return cfg.gamma2 * sigma;
}

/// Everything observed during one outer iteration. Trace rows keep the
/// pre-step measurements; the remaining fields serve tests and diagnostics.
struct IterRecord {
  long long k = 0;
  double f_before = 0.0;
  double f_after = 0.0;
  double grad_norm = 0.0;
  double block_grad_norm = 0.0;
  double block_grad_norm_after = 0.0;  // same block, after the update
  double sigma_before = 0.0;
  double sigma_after = 0.0;
  double rho = std::numeric_limits<double>::quiet_NaN();
  double alpha_hat = std::numeric_limits<double>::quiet_NaN();
  double step_norm = 0.0;
  int inner_iters = 0;
  bool success = false;
  bool subsolver_failed = false;
  BlockIndex block{std::vector<Index>{0}, 1};
  Vector step;
  ModelData model;  // exactly the block model the step was computed from
};

namespace detail {
inline std::uint64_t mix_seed(std::uint64_t seed) {
  // splitmix64 finalizer; keeps the selection stream apart from data seeds
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace detail

/// Greedy block coordinate descent with an adaptively regularized cubic
/// block model: pick a block by stationarity violation, approximately
/// minimize the cubic model over it, accept or reject by the decrease
/// ratio, and adapt sigma.
template <BlockObjective P>
class BlockCubicNewton {
public:
  BlockCubicNewton(const P& problem, Vector x0, SolverConfig cfg)
      : cfg_(std::move(cfg)),
        session_(make_session(problem, std::move(x0))),
        sigma_(cfg_.sigma0),
        rng_(detail::mix_seed(cfg_.seed)),
        start_(std::chrono::steady_clock::now()) {
    cfg_.validate();
    if (!session_.x().allFinite()) throw SolverAbort("starting point is not finite");
    if (!std::isfinite(session_.value()))
      throw SolverAbort("objective not finite at the starting point");
  }

  const Vector& x() const { return session_.x(); }
  double f() const { return session_.value(); }
  double sigma() const { return sigma_; }
  long long iterations_done() const { return k_; }
  double grad_norm() { return session_.full_gradient().norm(); }
  bool done() { return grad_norm() <= cfg_.grad_tol; }

  IterRecord step() {
    IterRecord rec;
    rec.k = k_;
    rec.f_before = session_.value();
    rec.sigma_before = sigma_;

    const Vector& gfull = session_.full_gradient();
    if (!gfull.allFinite()) throw SolverAbort("gradient not finite at iteration " + std::to_string(k_));
    rec.grad_norm = gfull.norm();
    if (rec.grad_norm <= cfg_.grad_tol)
      throw Error("step: called at a point already within the gradient tolerance");

    rec.block = select_block(cfg_.selection, gfull, rng_);
    const Vector g_block = gather(gfull, rec.block);
    rec.block_grad_norm = g_block.norm();

    ModelData md{rec.f_before, g_block, session_.block_hessian(rec.block), sigma_};

    double rho = -std::numeric_limits<double>::infinity();
    double f_trial = rec.f_before;
    bool accept = false;
    try {
      SubsolverResult sub = minimize_cubic(md, cfg_.subsolver_options());
      rec.alpha_hat = sub.alpha_hat;
      rec.inner_iters = sub.inner_iters;
      rec.step_norm = sub.s.norm();
      const double q_dec = quadratic_decrease(md, sub.s);
      if (q_dec > 0) {
        f_trial = session_.trial_value(rec.block, sub.s);
        if (!std::isfinite(f_trial))
          throw SolverAbort("objective not finite at trial point, iteration " +
                            std::to_string(k_));
        rho = compute_rho(rec.f_before, f_trial, q_dec);
        rec.rho = rho;
        accept = rho >= cfg_.eta1;
      }
      rec.step = std::move(sub.s);
    } catch (const SubsolverError&) {
      rec.subsolver_failed = true;  // keep x, inflate sigma as on any rejection
    }

    if (accept) {
      session_.accept(rec.block, rec.step, f_trial);
      assert(rec.f_before - f_trial >=
             cfg_.eta1 * ((1.0 - cfg_.beta) * rec.alpha_hat * rec.block_grad_norm *
                              rec.block_grad_norm +
                          sigma_ / 6.0 * rec.step_norm * rec.step_norm * rec.step_norm) -
                 1e-9);
    }
    rec.success = accept;
    rec.f_after = session_.value();
    rec.block_grad_norm_after =
        accept ? gather(session_.full_gradient(), rec.block).norm() : rec.block_grad_norm;

    sigma_ = update_sigma(sigma_, rho, cfg_);
    rec.sigma_after = sigma_;
    rec.model = std::move(md);
    ++k_;
    return rec;
  }

  Trace run() {
    Trace trace;
    trace.meta.solver = "ibcn";
    trace.meta.seed = cfg_.seed;
    trace.meta.q = cfg_.selection.kind == SelectionRule::Kind::max_abs_fill
                       ? cfg_.selection.q
                       : static_cast<Index>(cfg_.selection.partition.size());
    trace.rows.reserve(static_cast<std::size_t>(cfg_.max_iters));
    while (k_ < cfg_.max_iters && !done()) {
      const IterRecord rec = step();
      trace.rows.push_back(TraceRow{rec.k, rec.f_before, rec.grad_norm, rec.block_grad_norm,
                                    rec.sigma_before, rec.success ? 1.0 : 0.0, elapsed()});
    }
    return trace;
  }

  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

private:
  SolverConfig cfg_;
  SessionType<P> session_;
  double sigma_;
  long long k_ = 0;
  std::mt19937_64 rng_;
  std::chrono::steady_clock::time_point start_;
};

template <BlockObjective P>
Trace run_ibcn(const P& problem, const Vector& x0, const SolverConfig& cfg) {
  BlockCubicNewton<P> solver(problem, x0, cfg);
  return solver.run();
}

}  // namespace ibcn
