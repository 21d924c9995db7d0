#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "ibcn/cubic_model.hpp"
#include "ibcn/errors.hpp"

namespace ibcn {

struct SubsolverOptions {
  double tau = 1.0;
  double beta = 0.5;
  int max_inner_iters = 500;
  double bb_step_min = 1e-10;
  double bb_step_max = 1e10;
  int nonmonotone_window = 10;
  bool exact_1d = true;  // dispatch 1-D blocks to the closed form

  void validate() const {
    if (!(tau >= 0)) throw Error("subsolver: tau must be >= 0");
    if (!(beta > 0 && beta < 1)) throw Error("subsolver: beta must be in (0,1)");
    if (max_inner_iters < 1) throw Error("subsolver: max_inner_iters must be >= 1");
    if (!(bb_step_min > 0 && bb_step_min <= bb_step_max))
      throw Error("subsolver: bad BB step bounds");
    if (nonmonotone_window < 1) throw Error("subsolver: window must be >= 1");
  }
};

struct SubsolverResult {
  Vector s;
  int inner_iters = 0;
  double alpha_hat = 0.0;
  Vector reference_step;  // -alpha_hat * g, the point the model value is held below
};

class SubsolverError : public Error {
public:
  SubsolverError(std::string what, Vector best, int iters)
      : Error(std::move(what)), best_step(std::move(best)), inner_iters(iters) {}
  Vector best_step;
  int inner_iters = 0;
};

/// Re-verifies the two step conditions with plain scalar loops, sharing no
/// evaluation code with the iterative solver:
///   ||grad m(s)|| <= tau ||s||^2   and   m(s) <= m(-alpha_hat g),  s != 0.
inline bool check_step_conditions(const ModelData& md, const Vector& s, double tau,
                                  double beta) {
  const Index q = md.g.size();
  if (s.size() != q) return false;

  double s_sq = 0.0;
  for (Index i = 0; i < q; ++i) s_sq += s[i] * s[i];
  if (s_sq == 0.0) return false;
  const double s_norm = std::sqrt(s_sq);

  auto raw_model_value = [&](const Vector& v) {
    double lin = 0.0;
    for (Index i = 0; i < q; ++i) lin += md.g[i] * v[i];
    double quad = 0.0;
    for (Index i = 0; i < q; ++i) {
      double row = 0.0;
      for (Index j = 0; j < q; ++j) row += md.H(i, j) * v[j];
      quad += v[i] * row;
    }
    double nv = 0.0;
    for (Index i = 0; i < q; ++i) nv += v[i] * v[i];
    nv = std::sqrt(nv);
    return md.f0 + lin + 0.5 * quad + md.sigma / 6.0 * nv * nv * nv;
  };

  double grad_sq = 0.0;
  for (Index i = 0; i < q; ++i) {
    double row = 0.0;
    for (Index j = 0; j < q; ++j) row += md.H(i, j) * s[j];
    const double gi = md.g[i] + row + md.sigma / 2.0 * s_norm * s[i];
    grad_sq += gi * gi;
  }
  if (!(std::sqrt(grad_sq) <= tau * s_sq)) return false;

  const double alpha = cauchy_alpha(md, beta, spectral_norm_upper_bound(md.H));
  Vector reference(q);
  for (Index i = 0; i < q; ++i) reference[i] = -alpha * md.g[i];
  return raw_model_value(s) <= raw_model_value(reference);
}

/// Approximately minimizes the cubic block model with a Barzilai-Borwein
/// gradient method started from the reference point -alpha_hat g, stopping
/// as soon as the two step conditions hold. Works on model data only; never
/// touches the objective or its derivatives.
inline SubsolverResult minimize_cubic(const ModelData& md, const SubsolverOptions& opts) {
  md.validate();
  opts.validate();
  const Index q = md.g.size();
  const double gnorm = md.g.norm();
  if (!(gnorm > 0)) throw Error("minimize_cubic: zero block gradient");

  const double hnorm = spectral_norm_upper_bound(md.H);
  const double alpha_hat = cauchy_alpha(md, opts.beta, hnorm);
  const Vector s_hat = -alpha_hat * md.g;

  auto verified = [&](Vector s, int iters) -> std::optional<SubsolverResult> {
    if (check_step_conditions(md, s, opts.tau, opts.beta))
      return SubsolverResult{std::move(s), iters, alpha_hat, s_hat};
    return std::nullopt;
  };

  Vector s = s_hat;
  double m_s = model_value(md, s);
  const double m_cauchy = m_s;
  Vector grad = model_gradient(md, s);

  auto loop_conditions_hold = [&]() {
    return grad.norm() <= opts.tau * s.squaredNorm() && m_s <= m_cauchy;
  };

  // the reference step is kept whenever it already qualifies
  if (loop_conditions_hold()) {
    if (auto r = verified(s, 0)) return *r;
  }

  if (opts.exact_1d && q == 1) {
    Vector s1(1);
    s1[0] = solve_cubic_1d(md.g[0], md.H(0, 0), md.sigma);
    if (auto r = verified(std::move(s1), 0)) return *r;
    // ulp-level disagreement with the verifier; fall through to the iteration
  }

  std::vector<double> window;
  window.reserve(static_cast<std::size_t>(opts.nonmonotone_window));
  window.push_back(m_s);
  std::size_t window_pos = 0;

  Vector best_s = s;
  double best_m = m_s;

  double lambda_bb = 1.0 / (md.sigma * (1.0 + md.H.norm()));
  for (int t = 1; t <= opts.max_inner_iters; ++t) {
    const double grad_sq = grad.squaredNorm();
    const double m_ref = *std::max_element(window.begin(), window.end());

    double lam = std::clamp(lambda_bb, opts.bb_step_min, opts.bb_step_max);
    Vector s_new;
    double m_new = 0.0;
    bool stepped = false;
    for (int bt = 0; bt <= 60; ++bt) {
      s_new = s - lam * grad;
      m_new = model_value(md, s_new);
      if (m_new <= m_ref - 1e-4 * lam * grad_sq) {
        stepped = true;
        break;
      }
      lam *= 0.5;
    }
    if (!stepped) throw SubsolverError("cubic subproblem line search stalled", best_s, t);

    Vector grad_new = model_gradient(md, s_new);
    const Vector ds = s_new - s;
    const Vector dy = grad_new - grad;
    const double ds_dy = ds.dot(dy);
    lambda_bb = ds_dy > 0 ? ds.squaredNorm() / ds_dy
                          : std::min(2.0 * lam, opts.bb_step_max);

    s.swap(s_new);
    grad.swap(grad_new);
    m_s = m_new;
    if (window.size() < static_cast<std::size_t>(opts.nonmonotone_window)) {
      window.push_back(m_s);
    } else {
      window[window_pos] = m_s;
      window_pos = (window_pos + 1) % window.size();
    }
    if (m_s < best_m) {
      best_m = m_s;
      best_s = s;
    }

    if (loop_conditions_hold()) {
      if (auto r = verified(s, t)) return *r;
    }
  }
  throw SubsolverError("cubic subproblem iteration limit reached", best_s,
                       opts.max_inner_iters);
}

}  // namespace ibcn
