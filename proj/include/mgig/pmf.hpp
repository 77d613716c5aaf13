#pragma once

#include <cmath>
#include <string>
#include <utility>

#include "mgig/data.hpp"
#include "mgig/errors.hpp"
#include "mgig/linalg.hpp"
#include "mgig/rng.hpp"

namespace mgig {

struct PmfHyperParams {
  double sigma2;    // observation noise variance
  double sigma2_u;  // row-factor prior variance
  double sigma2_v;  // column-factor prior variance
  int d;            // latent rank

  PmfHyperParams(double sigma2_in, double sigma2_u_in, double sigma2_v_in, int d_in)
      : sigma2(sigma2_in), sigma2_u(sigma2_u_in), sigma2_v(sigma2_v_in), d(d_in) {
    if (!(sigma2 > 0.0) || !(sigma2_u > 0.0) || !(sigma2_v > 0.0)) {
      throw ValidationError("PmfHyperParams: variances must be positive");
    }
    if (d < 1) throw ValidationError("PmfHyperParams: rank must be at least 1");
  }
};

struct FactorPair {
  Matrix u;  // N x D
  Matrix v;  // M x D
};

/// Negative log posterior up to constants:
/// sum_obs (x - <u, v>)^2 / (2 sigma^2) + |U|^2 / (2 sigma_u^2) + |V|^2 / (2 sigma_v^2).
inline double pmf_objective(const ObservedMatrix& x, const PmfHyperParams& hp,
                            const FactorPair& f) {
  double sq = 0.0;
  for (int i = 0; i < x.rows(); ++i) {
    for (int j : x.observed_in_row(i)) {
      const double r = x.value(i, j) - f.u.row(i).dot(f.v.row(j));
      sq += r * r;
    }
  }
  return sq / (2.0 * hp.sigma2) + f.u.squaredNorm() / (2.0 * hp.sigma2_u) +
         f.v.squaredNorm() / (2.0 * hp.sigma2_v);
}

namespace detail {

/// Exact ridge update of every row of `target` given the other factor:
/// row i solves (S^{-2} sum_j v_j v_j^T + prior^{-1} I) t_i = S^{-2} sum_j x_ij v_j.
inline void pmf_ridge_update(Matrix& target, const Matrix& other, const ObservedMatrix& x,
                             bool rows_of_x, double sigma2, double prior_var) {
  const int d = static_cast<int>(target.cols());
  const int count = static_cast<int>(target.rows());
  for (int i = 0; i < count; ++i) {
    Matrix a = Matrix::Identity(d, d) / prior_var;
    Vector b = Vector::Zero(d);
    const auto& obs = rows_of_x ? x.observed_in_row(i) : x.observed_in_col(i);
    for (int j : obs) {
      const double value = rows_of_x ? x.value(i, j) : x.value(j, i);
      const auto vj = other.row(j);
      a.noalias() += vj.transpose() * vj / sigma2;
      b.noalias() += value * vj.transpose() / sigma2;
    }
    target.row(i) = a.ldlt().solve(b).transpose();
  }
}

}  // namespace detail

struct PmfResult {
  FactorPair factors;
  double objective;
  int iterations;
  bool converged;
};

/// MAP point estimate by alternating exact ridge regressions. The objective
/// is non-increasing at every iteration; stops on relative decrease < tol.
/// Initial factors are i.i.d. N(0, 0.01).
inline PmfResult pmf_map(const ObservedMatrix& x, const PmfHyperParams& hp, int max_iters,
                         double tol, SeededRng& rng) {
  FactorPair f{Matrix(x.rows(), hp.d), Matrix(x.cols(), hp.d)};
  for (int i = 0; i < f.u.rows(); ++i) {
    for (int k = 0; k < hp.d; ++k) f.u(i, k) = 0.1 * rng.normal();
  }
  for (int j = 0; j < f.v.rows(); ++j) {
    for (int k = 0; k < hp.d; ++k) f.v(j, k) = 0.1 * rng.normal();
  }

  double prev = pmf_objective(x, hp, f);
  int iter = 0;
  bool converged = false;
  for (; iter < max_iters; ++iter) {
    detail::pmf_ridge_update(f.u, f.v, x, /*rows_of_x=*/true, hp.sigma2, hp.sigma2_u);
    detail::pmf_ridge_update(f.v, f.u, x, /*rows_of_x=*/false, hp.sigma2, hp.sigma2_v);
    const double obj = pmf_objective(x, hp, f);
    if (prev - obj < tol * std::max(1.0, std::abs(prev))) {
      prev = obj;
      converged = true;
      ++iter;
      break;
    }
    prev = obj;
  }
  return PmfResult{std::move(f), prev, iter, converged};
}

/// Dense reconstruction U V^T.
inline Matrix pmf_reconstruction(const FactorPair& f) { return f.u * f.v.transpose(); }

}  // namespace mgig
