#pragma once

#include <Eigen/SparseCore>
#include <cmath>
#include <utility>

#include "ibcn/errors.hpp"
#include "ibcn/problem.hpp"

namespace ibcn {

namespace detail {
// log(1 + e^{-t}) without overflow for any finite t.
inline double log1p_exp_neg(double t) {
  if (t > 0) return std::log1p(std::exp(-t));
  return -t + std::log1p(std::exp(t));
}

// d/dt log(1+e^{-t}) = -sigma(-t); returns sigma(-t) = 1/(1+e^t) stably.
inline double sigmoid_neg(double t) {
  if (t > 0) {
    const double e = std::exp(-t);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(t));
}

// Second derivative weight e^{-t}/(1+e^{-t})^2, symmetric in t.
inline double sigmoid_weight(double t) {
  const double e = std::exp(-std::abs(t));
  const double d = 1.0 + e;
  return e / (d * d);
}
}  // namespace detail

/// l2-regularized logistic regression with an unpenalized intercept. The
/// variable vector has length n+1: n feature weights followed by the
/// intercept. Labels must be -1 or +1.
class LogRegObjective {
public:
  using SpMat = Eigen::SparseMatrix<double>;  // column-major, m x n

  LogRegObjective(SpMat samples, Vector labels, double lambda)
      : A_(std::move(samples)), b_(std::move(labels)), lambda_(lambda) {
    if (A_.rows() != b_.size()) throw DataError("logreg: sample/label count mismatch");
    if (A_.rows() < 1) throw DataError("logreg: empty dataset");
    if (!(lambda_ >= 0)) throw Error("logreg: lambda must be >= 0");
    for (Index i = 0; i < b_.size(); ++i)
      if (b_[i] != 1.0 && b_[i] != -1.0)
        throw DataError("logreg: label not in {-1,+1} at sample " + std::to_string(i + 1));
    A_.makeCompressed();
  }

  Index dimension() const { return A_.cols() + 1; }  // weights plus intercept
  Index num_samples() const { return A_.rows(); }
  Index num_features() const { return A_.cols(); }
  Index intercept_index() const { return A_.cols(); }
  double lambda() const { return lambda_; }
  const SpMat& samples() const { return A_; }
  const Vector& labels() const { return b_; }

  // Classification margins b_i * (a_i'x + z).
  Vector margins(const Vector& xz) const {
    check_dim(xz);
    Vector t = A_ * xz.head(A_.cols());
    t.array() += xz[A_.cols()];
    return t.cwiseProduct(b_);
  }

  double value(const Vector& xz) const { return value_from_margins(margins(xz), xz); }

  Vector full_gradient(const Vector& xz) const {
    return gradient_from_margins(margins(xz), xz);
  }

  Vector block_gradient(const Vector& xz, const BlockIndex& I) const {
    return gather(full_gradient(xz), I);
  }

  Matrix block_hessian(const Vector& xz, const BlockIndex& I) const {
    return hessian_from_margins(margins(xz), I);
  }

  Vector block_hessian_diagonal(const Vector& xz, const BlockIndex& I) const {
    return hessian_diagonal_from_margins(margins(xz), I);
  }

  double value_from_margins(const Vector& t, const Vector& xz) const {
    double loss = 0.0;
    for (Index i = 0; i < t.size(); ++i) loss += detail::log1p_exp_neg(t[i]);
    return loss / static_cast<double>(t.size()) +
           lambda_ * xz.head(A_.cols()).squaredNorm();
  }

  Vector gradient_from_margins(const Vector& t, const Vector& xz) const {
    const double inv_m = 1.0 / static_cast<double>(t.size());
    Vector coef(t.size());
    for (Index i = 0; i < t.size(); ++i) coef[i] = -inv_m * b_[i] * detail::sigmoid_neg(t[i]);
    Vector g(dimension());
    g.head(A_.cols()) = A_.transpose() * coef + 2.0 * lambda_ * xz.head(A_.cols());
    g[A_.cols()] = coef.sum();
    return g;
  }

  Matrix hessian_from_margins(const Vector& t, const BlockIndex& I) const {
    const Index q = I.size();
    Matrix B(num_samples(), q);
    for (Index j = 0; j < q; ++j) {
      if (I[j] == intercept_index()) {
        B.col(j).setOnes();
      } else {
        B.col(j).setZero();
        for (SpMat::InnerIterator it(A_, I[j]); it; ++it) B(it.row(), j) = it.value();
      }
    }
    Vector w(t.size());
    for (Index i = 0; i < t.size(); ++i) w[i] = detail::sigmoid_weight(t[i]);
    Matrix H = B.transpose() * w.asDiagonal() * B / static_cast<double>(t.size());
    for (Index j = 0; j < q; ++j)
      if (I[j] != intercept_index()) H(j, j) += 2.0 * lambda_;
    return H;
  }

  Vector hessian_diagonal_from_margins(const Vector& t, const BlockIndex& I) const {
    const double inv_m = 1.0 / static_cast<double>(t.size());
    Vector w(t.size());
    for (Index i = 0; i < t.size(); ++i) w[i] = detail::sigmoid_weight(t[i]);
    Vector d = Vector::Zero(I.size());
    for (Index j = 0; j < I.size(); ++j) {
      if (I[j] == intercept_index()) {
        d[j] = inv_m * w.sum();
      } else {
        for (SpMat::InnerIterator it(A_, I[j]); it; ++it)
          d[j] += inv_m * w[it.row()] * it.value() * it.value();
        d[j] += 2.0 * lambda_;
      }
    }
    return d;
  }

  /// Session caching the margins; block trials touch only the columns of
  /// the updated coordinates. Margins are rebuilt from scratch every
  /// kSessionRefreshInterval accepted steps.
  class Session {
  public:
    Session(const LogRegObjective& prob, Vector x0)
        : prob_(&prob), x_(std::move(x0)), margins_(prob.margins(x_)) {
      f_ = prob_->value_from_margins(margins_, x_);
    }

    const Vector& x() const { return x_; }
    double value() const { return f_; }

    const Vector& full_gradient() {
      if (!grad_valid_) {
        grad_ = prob_->gradient_from_margins(margins_, x_);
        grad_valid_ = true;
      }
      return grad_;
    }

    Matrix block_hessian(const BlockIndex& I) const {
      return prob_->hessian_from_margins(margins_, I);
    }

    Vector block_hessian_diagonal(const BlockIndex& I) const {
      return prob_->hessian_diagonal_from_margins(margins_, I);
    }

    double trial_value(const BlockIndex& I, const Vector& s) const {
      trial_margins_ = margins_;
      add_margin_update(trial_margins_, I, s);
      Vector xz_trial = x_;  // only the penalty term reads the iterate
      add_in_block_inplace(xz_trial, s, I);
      return prob_->value_from_margins(trial_margins_, xz_trial);
    }

    void accept(const BlockIndex& I, const Vector& s, double f_trial) {
      add_margin_update(margins_, I, s);
      add_in_block_inplace(x_, s, I);
      f_ = f_trial;
      grad_valid_ = false;
      if (++accepts_since_refresh_ >= kSessionRefreshInterval) refresh();
    }

    void refresh() {
      margins_ = prob_->margins(x_);
      grad_valid_ = false;
      accepts_since_refresh_ = 0;
    }

  private:
    void add_margin_update(Vector& t, const BlockIndex& I, const Vector& s) const {
      const auto& A = prob_->samples();
      for (Index j = 0; j < I.size(); ++j) {
        if (I[j] == prob_->intercept_index()) {
          t += s[j] * prob_->labels();
        } else {
          for (SpMat::InnerIterator it(A, I[j]); it; ++it)
            t[it.row()] += s[j] * it.value() * prob_->labels()[it.row()];
        }
      }
    }

    const LogRegObjective* prob_;
    Vector x_;
    Vector margins_;
    mutable Vector trial_margins_;
    double f_ = 0.0;
    Vector grad_;
    bool grad_valid_ = false;
    long long accepts_since_refresh_ = 0;
  };

private:
  void check_dim(const Vector& xz) const {
    if (xz.size() != dimension()) throw Error("logreg: dimension mismatch");
  }

  SpMat A_;
  Vector b_;
  double lambda_;
};

}  // namespace ibcn
