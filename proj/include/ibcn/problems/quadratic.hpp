#pragma once

#include <Eigen/Cholesky>
#include <utility>

#include "ibcn/errors.hpp"
#include "ibcn/problem.hpp"

namespace ibcn {

/// Strictly convex quadratic x'Qx/2 + c'x. Its block Hessians are constant,
/// so the cubic block model matches the objective exactly along block
/// steps; used as the reference objective in tests.
class QuadraticObjective {
public:
  QuadraticObjective(Matrix Q, Vector c) : Q_(std::move(Q)), c_(std::move(c)) {
    if (Q_.rows() != Q_.cols() || Q_.rows() != c_.size())
      throw Error("quadratic: shape mismatch");
    if (!Q_.isApprox(Q_.transpose(), 1e-12)) throw Error("quadratic: Q must be symmetric");
    Eigen::LLT<Matrix> llt(Q_);
    if (llt.info() != Eigen::Success)
      throw Error("quadratic: Q must be positive definite");
  }

  Index dimension() const { return c_.size(); }

  double value(const Vector& x) const {
    check_dim(x);
    return 0.5 * x.dot(Q_ * x) + c_.dot(x);
  }

  Vector full_gradient(const Vector& x) const {
    check_dim(x);
    return Q_ * x + c_;
  }

  Vector block_gradient(const Vector& x, const BlockIndex& I) const {
    return gather(full_gradient(x), I);
  }

  Matrix block_hessian(const Vector& x, const BlockIndex& I) const {
    check_dim(x);
    return gather_submatrix(Q_, I);
  }

  Vector block_hessian_diagonal(const Vector& x, const BlockIndex& I) const {
    check_dim(x);
    Vector d(I.size());
    for (Index j = 0; j < I.size(); ++j) d[j] = Q_(I[j], I[j]);
    return d;
  }

  Vector minimizer() const { return Q_.ldlt().solve(-c_); }
  double min_value() const { return value(minimizer()); }

  const Matrix& Q() const { return Q_; }
  const Vector& c() const { return c_; }

private:
  void check_dim(const Vector& x) const {
    if (x.size() != c_.size()) throw Error("quadratic: dimension mismatch");
  }

  Matrix Q_;
  Vector c_;
};

}  // namespace ibcn
