#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

#include "ibcn/errors.hpp"
#include "ibcn/problem.hpp"

namespace ibcn {

/// Least squares with a smoothed nonconvex sparsity penalty:
///   (1/m) ||Ax - b||^2 + lambda * sum_i (x_i^2 + omega^2)^(p/2),
/// with omega > 0 and p in (0,1).
class SparseLsObjective {
public:
  SparseLsObjective(Matrix A, Vector b, double lambda, double omega, double p)
      : A_(std::move(A)), b_(std::move(b)), lambda_(lambda), omega_(omega), p_(p) {
    if (A_.rows() < 1 || A_.cols() < 1) throw Error("sparse_ls: empty data matrix");
    if (A_.rows() != b_.size()) throw Error("sparse_ls: row count does not match b");
    if (!(lambda_ >= 0)) throw Error("sparse_ls: lambda must be >= 0");
    if (!(omega_ > 0)) throw Error("sparse_ls: omega must be positive");
    if (!(p_ > 0 && p_ < 1)) throw Error("sparse_ls: p must be in (0,1)");
    col_sq_norms_ = A_.colwise().squaredNorm();
  }

  Index dimension() const { return A_.cols(); }
  Index num_samples() const { return A_.rows(); }
  const Matrix& A() const { return A_; }
  const Vector& b() const { return b_; }
  double lambda() const { return lambda_; }
  double omega() const { return omega_; }
  double p() const { return p_; }

  // 1-D penalty phi(t) = (t^2 + omega^2)^(p/2) and its derivatives.
  double penalty(double t) const { return std::pow(t * t + omega_ * omega_, p_ / 2.0); }

  double penalty_grad(double t) const {
    return p_ * t * std::pow(t * t + omega_ * omega_, p_ / 2.0 - 1.0);
  }

  double penalty_hess(double t) const {
    const double u = t * t + omega_ * omega_;
    return p_ * std::pow(u, p_ / 2.0 - 2.0) * ((p_ - 1.0) * t * t + omega_ * omega_);
  }

  // Upper bound on |phi'''| over the interval [a, b]; each factor of the
  // third derivative is bounded separately over the interval.
  double penalty_third_derivative_bound(double a, double b) const {
    if (a > b) std::swap(a, b);
    const double t_max = std::max(std::abs(a), std::abs(b));
    const double t_min = (a <= 0.0 && b >= 0.0) ? 0.0 : std::min(std::abs(a), std::abs(b));
    const double u_min = t_min * t_min + omega_ * omega_;
    return 2.0 * p_ * (1.0 - p_ / 2.0) * t_max * std::pow(u_min, p_ / 2.0 - 3.0) *
           ((1.0 - p_) * t_max * t_max + 3.0 * omega_ * omega_);
  }

  double value(const Vector& x) const {
    check_dim(x);
    const double data = (A_ * x - b_).squaredNorm() / static_cast<double>(A_.rows());
    double reg = 0.0;
    for (Index i = 0; i < x.size(); ++i) reg += penalty(x[i]);
    return data + lambda_ * reg;
  }

  Vector full_gradient(const Vector& x) const {
    check_dim(x);
    const Vector r = A_ * x - b_;
    Vector g = (2.0 / static_cast<double>(A_.rows())) * (A_.transpose() * r);
    for (Index i = 0; i < x.size(); ++i) g[i] += lambda_ * penalty_grad(x[i]);
    return g;
  }

  Vector block_gradient(const Vector& x, const BlockIndex& I) const {
    return gather(full_gradient(x), I);
  }

  Matrix block_hessian(const Vector& x, const BlockIndex& I) const {
    check_dim(x);
    const Index q = I.size();
    Matrix Ai(A_.rows(), q);
    for (Index j = 0; j < q; ++j) Ai.col(j) = A_.col(I[j]);
    Matrix H = (2.0 / static_cast<double>(A_.rows())) * (Ai.transpose() * Ai);
    for (Index j = 0; j < q; ++j) H(j, j) += lambda_ * penalty_hess(x[I[j]]);
    return H;
  }

  Vector block_hessian_diagonal(const Vector& x, const BlockIndex& I) const {
    check_dim(x);
    Vector d(I.size());
    for (Index j = 0; j < I.size(); ++j)
      d[j] = 2.0 / static_cast<double>(A_.rows()) * col_sq_norms_[I[j]] +
             lambda_ * penalty_hess(x[I[j]]);
    return d;
  }

  /// Session caching the residual r = Ax - b; block trials cost O(m q)
  /// instead of a full evaluation. The residual is rebuilt from scratch
  /// every kSessionRefreshInterval accepted steps.
  class Session {
  public:
    Session(const SparseLsObjective& prob, Vector x0)
        : prob_(&prob), x_(std::move(x0)), r_(prob.A() * x_ - prob.b()) {
      reg_sum_ = 0.0;
      for (Index i = 0; i < x_.size(); ++i) reg_sum_ += prob_->penalty(x_[i]);
      f_ = data_value() + prob_->lambda() * reg_sum_;
    }

    const Vector& x() const { return x_; }
    double value() const { return f_; }

    const Vector& full_gradient() {
      if (!grad_valid_) {
        grad_ = (2.0 / m()) * (prob_->A().transpose() * r_);
        for (Index i = 0; i < x_.size(); ++i) grad_[i] += prob_->lambda() * prob_->penalty_grad(x_[i]);
        grad_valid_ = true;
      }
      return grad_;
    }

    Matrix block_hessian(const BlockIndex& I) const { return prob_->block_hessian(x_, I); }

    Vector block_hessian_diagonal(const BlockIndex& I) const {
      return prob_->block_hessian_diagonal(x_, I);
    }

    double trial_value(const BlockIndex& I, const Vector& s) const {
      trial_r_ = r_;
      for (Index j = 0; j < I.size(); ++j) trial_r_ += s[j] * prob_->A().col(I[j]);
      double reg = reg_sum_;
      for (Index j = 0; j < I.size(); ++j)
        reg += prob_->penalty(x_[I[j]] + s[j]) - prob_->penalty(x_[I[j]]);
      return trial_r_.squaredNorm() / m() + prob_->lambda() * reg;
    }

    void accept(const BlockIndex& I, const Vector& s, double f_trial) {
      for (Index j = 0; j < I.size(); ++j) {
        reg_sum_ += prob_->penalty(x_[I[j]] + s[j]) - prob_->penalty(x_[I[j]]);
        r_ += s[j] * prob_->A().col(I[j]);
      }
      add_in_block_inplace(x_, s, I);
      f_ = f_trial;
      grad_valid_ = false;
      if (++accepts_since_refresh_ >= kSessionRefreshInterval) refresh();
    }

    void refresh() {
      r_ = prob_->A() * x_ - prob_->b();
      reg_sum_ = 0.0;
      for (Index i = 0; i < x_.size(); ++i) reg_sum_ += prob_->penalty(x_[i]);
      grad_valid_ = false;
      accepts_since_refresh_ = 0;
    }

  private:
    double m() const { return static_cast<double>(prob_->num_samples()); }
    double data_value() const { return r_.squaredNorm() / m(); }

    const SparseLsObjective* prob_;
    Vector x_;
    Vector r_;
    mutable Vector trial_r_;
    double reg_sum_ = 0.0;
    double f_ = 0.0;
    Vector grad_;
    bool grad_valid_ = false;
    long long accepts_since_refresh_ = 0;
  };

private:
  void check_dim(const Vector& x) const {
    if (x.size() != A_.cols()) throw Error("sparse_ls: dimension mismatch");
  }

  Matrix A_;
  Vector b_;
  double lambda_, omega_, p_;
  Vector col_sq_norms_;
};

struct SparseLsGenerated {
  SparseLsObjective objective;
  Vector ground_truth;
};

/// Random recovery instance: A uniform on (0,1), a planted vector with
/// ceil(density*n) entries set to +-1 at uniformly chosen positions, and
/// b = A x_true + gaussian noise. Deterministic for a fixed seed.
inline SparseLsGenerated generate_sparse_ls(Index m, Index n, double density,
                                            double noise_sd, std::uint64_t seed,
                                            double lambda = 1e-3, double omega = 1e-2,
                                            double p = 0.5) {
  if (m < 1 || n < 1) throw Error("generate_sparse_ls: m and n must be >= 1");
  if (!(density > 0 && density <= 1)) throw Error("generate_sparse_ls: density must be in (0,1]");
  if (!(noise_sd >= 0)) throw Error("generate_sparse_ls: negative noise level");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Matrix A(m, n);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j) A(i, j) = unif(rng);

  const Index nnz = static_cast<Index>(std::ceil(density * static_cast<double>(n)));
  std::vector<Index> pos(static_cast<std::size_t>(n));
  std::iota(pos.begin(), pos.end(), Index{0});
  std::shuffle(pos.begin(), pos.end(), rng);
  Vector x_true = Vector::Zero(n);
  std::bernoulli_distribution coin(0.5);
  for (Index k = 0; k < nnz; ++k)
    x_true[pos[static_cast<std::size_t>(k)]] = coin(rng) ? 1.0 : -1.0;

  Vector noise(m);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (Index i = 0; i < m; ++i) noise[i] = noise_sd * gauss(rng);

  Vector b = A * x_true + noise;
  return SparseLsGenerated{SparseLsObjective(std::move(A), std::move(b), lambda, omega, p),
                           std::move(x_true)};
}

}  // namespace ibcn
