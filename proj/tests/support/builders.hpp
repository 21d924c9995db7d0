#pragma once

// Random instances shared by the unit and acceptance suites.

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ibcn/cubic_model.hpp"
#include "ibcn/libsvm.hpp"
#include "ibcn/problems/logreg.hpp"
#include "ibcn/problems/quadratic.hpp"
#include "ibcn/problems/sparse_ls.hpp"

namespace testing_support {

using ibcn::Index;
using ibcn::Matrix;
using ibcn::Vector;

inline Vector random_vector(Index n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> gauss(0.0, scale);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = gauss(rng);
  return v;
}

inline Matrix random_symmetric(Index n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> gauss(0.0, scale);
  Matrix M(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j <= i; ++j) M(i, j) = M(j, i) = gauss(rng);
  return M;
}

// Symmetric matrix with eigenvalues drawn uniformly from [lo, hi].
inline Matrix random_spectrum_matrix(Index n, std::mt19937_64& rng, double lo, double hi) {
  const Matrix G = random_symmetric(n, rng);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(G);
  std::uniform_real_distribution<double> unif(lo, hi);
  Vector lam(n);
  for (Index i = 0; i < n; ++i) lam[i] = unif(rng);
  return eig.eigenvectors() * lam.asDiagonal() * eig.eigenvectors().transpose();
}

inline Matrix random_spd(Index n, std::mt19937_64& rng, double lo = 0.5, double hi = 2.0) {
  return random_spectrum_matrix(n, rng, lo, hi);
}

struct ModelParams {
  double g_scale_lo = 0.3, g_scale_hi = 3.0;
  double h_eig_lo = -2.0, h_eig_hi = 2.0;
  double sigma_lo = 0.5, sigma_hi = 8.0;
};

inline ibcn::ModelData random_model(Index q, std::mt19937_64& rng, ModelParams pr = {}) {
  std::uniform_real_distribution<double> gs(pr.g_scale_lo, pr.g_scale_hi);
  std::uniform_real_distribution<double> sg(pr.sigma_lo, pr.sigma_hi);
  ibcn::ModelData md;
  md.f0 = std::normal_distribution<double>(0.0, 1.0)(rng);
  md.g = random_vector(q, rng);
  if (md.g.norm() < 1e-8) md.g[0] = 1.0;
  md.g *= gs(rng) / md.g.norm() * std::sqrt(double(q));
  md.H = q == 1 ? Matrix::Constant(1, 1, std::uniform_real_distribution<double>(
                                             pr.h_eig_lo, pr.h_eig_hi)(rng))
                : random_spectrum_matrix(q, rng, pr.h_eig_lo, pr.h_eig_hi);
  md.sigma = sg(rng);
  return md;
}

inline ibcn::QuadraticObjective random_quadratic(Index n, std::mt19937_64& rng,
                                                 double lo = 0.5, double hi = 2.0,
                                                 bool zero_linear_term = false) {
  Matrix Q = random_spd(n, rng, lo, hi);
  Vector c = zero_linear_term ? Vector::Zero(n) : random_vector(n, rng);
  return ibcn::QuadraticObjective(std::move(Q), std::move(c));
}

inline ibcn::LogRegObjective random_logreg(Index m, Index n, std::uint64_t seed,
                                           double lambda = 1e-3) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Eigen::Triplet<double>> trips;
  Vector w = random_vector(n, rng);
  Vector b(m);
  for (Index i = 0; i < m; ++i) {
    double score = 0.0;
    for (Index j = 0; j < n; ++j) {
      const double v = gauss(rng);
      trips.emplace_back(static_cast<int>(i), static_cast<int>(j), v);
      score += v * w[j];
    }
    b[i] = (score / std::sqrt(double(n)) + 0.5 * gauss(rng)) >= 0 ? 1.0 : -1.0;
  }
  Eigen::SparseMatrix<double> A(static_cast<int>(m), static_cast<int>(n));
  A.setFromTriplets(trips.begin(), trips.end());
  return ibcn::LogRegObjective(std::move(A), std::move(b), lambda);
}

// Synthetic stand-in with the shape and character of the madelon training
// set: integer-valued features, a small informative core taking cluster
// values near +-1, many near-duplicate copies of it (heavy collinearity),
// mostly noise columns, and a weak noisy labeling rule. The duplicate
// groups keep the logistic landscape ill-conditioned enough that solvers
// are still separated after thousands of iterations.
inline std::string make_madelon_like_libsvm(Index m, Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  const Index latent = std::min<Index>(10, n);
  const Index redundant = std::min<Index>(32 * latent, n - latent);
  Vector w(latent);
  for (Index j = 0; j < latent; ++j) w[j] = gauss(rng);
  std::vector<Index> copy_of(static_cast<std::size_t>(redundant));
  std::vector<double> copy_sign(static_cast<std::size_t>(redundant));
  for (Index r = 0; r < redundant; ++r) {
    copy_of[static_cast<std::size_t>(r)] = static_cast<Index>(rng() % static_cast<std::uint64_t>(latent));
    copy_sign[static_cast<std::size_t>(r)] = unif(rng) < 0.5 ? 1.0 : -1.0;
  }

  std::ostringstream out;
  Vector z(latent);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < latent; ++j) z[j] = (unif(rng) < 0.5 ? 1.0 : -1.0) + 0.3 * gauss(rng);
    const double score = w.dot(z) / std::sqrt(double(latent));
    const int label = (score + 0.8 * gauss(rng)) >= 0 ? 1 : -1;

    out << label;
    for (Index j = 0; j < n; ++j) {
      double v;
      if (j < latent) {
        v = z[j];
      } else if (j < latent + redundant) {
        const auto r = static_cast<std::size_t>(j - latent);
        v = copy_sign[r] * z[copy_of[r]] + 0.02 * gauss(rng);
      } else {
        v = gauss(rng);
      }
      int quantized = static_cast<int>(std::lround(480.0 + 120.0 * v));
      quantized = std::clamp(quantized, 100, 900);
      out << ' ' << (j + 1) << ':' << quantized;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace testing_support
