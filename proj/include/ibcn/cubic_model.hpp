#pragma once

#include <cmath>
#include <limits>

#include "ibcn/block.hpp"
#include "ibcn/errors.hpp"

namespace ibcn {

/// Data of the block model built at the current iterate: objective value,
/// block gradient, block Hessian and the cubic regularization weight.
struct ModelData {
  double f0 = 0.0;
  Vector g;
  Matrix H;
  double sigma = 1.0;

  Index block_size() const { return g.size(); }

  void validate() const {
    if (!(sigma > 0)) throw Error("model: sigma must be positive");
    if (g.size() < 1) throw Error("model: empty block");
    if (H.rows() != g.size() || H.cols() != g.size())
      throw Error("model: Hessian shape does not match gradient");
  }
};

/// f0 + g's + s'Hs/2.
inline double quadratic_value(const ModelData& md, const Vector& s) {
  if (s.size() != md.g.size()) throw Error("quadratic_value: step size mismatch");
  return md.f0 + md.g.dot(s) + 0.5 * s.dot(md.H * s);
}

/// Quadratic model plus the cubic term (sigma/6)||s||^3.
inline double model_value(const ModelData& md, const Vector& s) {
  const double ns = s.norm();
  return quadratic_value(md, s) + md.sigma / 6.0 * ns * ns * ns;
}

/// g + Hs + (sigma/2)||s|| s.
inline Vector model_gradient(const ModelData& md, const Vector& s) {
  if (s.size() != md.g.size()) throw Error("model_gradient: step size mismatch");
  return md.g + md.H * s + (md.sigma / 2.0 * s.norm()) * s;
}

/// Decrease of the quadratic model at s, computed as -g's - s'Hs/2 so the
/// shared constant term cannot cancel.
inline double quadratic_decrease(const ModelData& md, const Vector& s) {
  return -md.g.dot(s) - 0.5 * s.dot(md.H * s);
}

/// Upper bound on the spectral norm of a symmetric matrix: power iteration
/// slightly inflated, with the Frobenius norm as fallback when the
/// iteration has not settled. Exact for 1x1 matrices.
inline double spectral_norm_upper_bound(const Matrix& H) {
  const Index q = H.rows();
  if (q == 1) return std::abs(H(0, 0));

  Vector v = Vector::Ones(q);
  for (Index i = 0; i < q; ++i) v[i] += 1e-3 * static_cast<double>(i + 1) / static_cast<double>(q);
  v.normalize();

  double est = 0.0;
  bool converged = false;
  for (int it = 0; it < 50; ++it) {
    Vector w = H * v;
    const double nw = w.norm();
    if (nw == 0.0) return 0.0;
    if (it > 0 && std::abs(nw - est) <= 1e-8 * std::max(1.0, nw)) {
      est = nw;
      converged = true;
      break;
    }
    est = nw;
    v = w / nw;
  }
  if (!converged) return H.norm();  // Frobenius
  return est * (1.0 + 1e-6);
}

/// Step length of the reference point -alpha*g: the smaller of beta/|H| and
/// sqrt(3 beta / (sigma ||g||)), the first taken as +inf when hnorm is 0.
/// hnorm may be any upper bound on the spectral norm of the block Hessian.
inline double cauchy_alpha(const ModelData& md, double beta, double hnorm) {
  const double gnorm = md.g.norm();
  if (!(gnorm > 0)) throw Error("cauchy_alpha: zero block gradient");
  if (!(beta > 0 && beta < 1)) throw Error("cauchy_alpha: beta must be in (0,1)");
  if (hnorm < 0) throw Error("cauchy_alpha: negative Hessian norm bound");
  const double curv_part = hnorm == 0.0 ? std::numeric_limits<double>::infinity()
                                        : beta / hnorm;
  const double cubic_part = std::sqrt(3.0 * beta / (md.sigma * gnorm));
  return std::min(curv_part, cubic_part);
}

/// Global minimizer of g s + h s^2/2 + (sigma/6)|s|^3 over the real line.
namespace detail {
// Negative root of (sigma/2) t^2 - h t - g = 0 for g > 0, written to avoid
// cancellation when h is large and positive.
inline double cubic_1d_negative_root(double g, double h, double sigma) {
  const double disc = std::sqrt(h * h + 2.0 * sigma * g);
  if (h <= 0.0) return (h - disc) / sigma;
  return -2.0 * g / (h + disc);
}
}  // namespace detail

inline double solve_cubic_1d(double g, double h, double sigma) {
  if (!(sigma > 0)) throw Error("solve_cubic_1d: sigma must be positive");
  if (g == 0.0) {
    if (h >= 0.0) return 0.0;
    return 2.0 * h / sigma;  // either sign is a global minimizer; pick the negative one
  }
  if (g > 0.0) return detail::cubic_1d_negative_root(g, h, sigma);
  return -detail::cubic_1d_negative_root(-g, h, sigma);
}

}  // namespace ibcn
