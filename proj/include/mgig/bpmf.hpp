#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "mgig/data.hpp"
#include "mgig/errors.hpp"
#include "mgig/parallel.hpp"
#include "mgig/pmf.hpp"
#include "mgig/rng.hpp"

namespace mgig {

struct GibbsChain {
  std::vector<FactorPair> samples;  // thinned, post burn-in
  int burn_in = 0;
  int lag = 1;
  std::uint64_t seed = 0;
};

namespace detail {

/// One exact conditional draw of factor row i given the other factor:
/// precision P = S^{-2} sum_j v_j v_j^T + prior^{-1} I, mean P^{-1} b,
/// draw mu + U^{-1} z with U the upper Cholesky factor of P.
inline Vector gibbs_row_draw(const Matrix& other, const ObservedMatrix& x, bool rows_of_x,
                             int i, double sigma2, double prior_var, SeededRng& rng) {
  const int d = static_cast<int>(other.cols());
  Matrix p = Matrix::Identity(d, d) / prior_var;
  Vector b = Vector::Zero(d);
  const auto& obs = rows_of_x ? x.observed_in_row(i) : x.observed_in_col(i);
  for (int j : obs) {
    const double value = rows_of_x ? x.value(i, j) : x.value(j, i);
    const auto vj = other.row(j);
    p.noalias() += vj.transpose() * vj / sigma2;
    b.noalias() += value * vj.transpose() / sigma2;
  }
  Eigen::LLT<Matrix> llt(p);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("gibbs_row_draw: conditional precision not SPD");
  }
  Vector z(d);
  for (int k = 0; k < d; ++k) z[k] = rng.normal();
  return llt.solve(b) + llt.matrixU().solve(z);
}

}  // namespace detail

/// Gibbs sampler over (U, V) with fixed isotropic priors. Sweeps alternate
/// exact conditional draws of all rows of U given V, then all rows of V given
/// U. Rows within a side are conditionally independent and may be drawn in
/// parallel; each row's stream is derived from (seed, sweep, side, row), so
/// the chain does not depend on the worker count. Keeps every `lag`-th sweep
/// after `burn_in`.
inline GibbsChain bpmf_gibbs(const ObservedMatrix& x, const PmfHyperParams& hp,
                             int total_iters, int burn_in, int lag, const SeededRng& rng,
                             const FactorPair& init, int workers = 1) {
  if (total_iters < 1 || burn_in < 0 || lag < 1 || burn_in >= total_iters) {
    throw ValidationError("bpmf_gibbs: invalid sweep counts");
  }
  if (init.u.rows() != x.rows() || init.v.rows() != x.cols() ||
      init.u.cols() != hp.d || init.v.cols() != hp.d) {
    throw DimensionMismatch("bpmf_gibbs: init factors do not match data/rank");
  }

  GibbsChain chain;
  chain.burn_in = burn_in;
  chain.lag = lag;
  chain.seed = rng.seed();
  chain.samples.reserve(static_cast<std::size_t>((total_iters - burn_in) / lag));

  FactorPair f = init;
  for (int sweep = 1; sweep <= total_iters; ++sweep) {
    const SeededRng sweep_rng = rng.stream(static_cast<std::uint64_t>(sweep));
    const SeededRng u_rng = sweep_rng.stream(0);
    const SeededRng v_rng = sweep_rng.stream(1);
    parallel_for(x.rows(), workers, [&](std::int64_t i) {
      SeededRng row_rng = u_rng.stream(static_cast<std::uint64_t>(i));
      f.u.row(i) = detail::gibbs_row_draw(f.v, x, /*rows_of_x=*/true, static_cast<int>(i),
                                          hp.sigma2, hp.sigma2_u, row_rng)
                       .transpose();
    });
    parallel_for(x.cols(), workers, [&](std::int64_t j) {
      SeededRng row_rng = v_rng.stream(static_cast<std::uint64_t>(j));
      f.v.row(j) = detail::gibbs_row_draw(f.u, x, /*rows_of_x=*/false, static_cast<int>(j),
                                          hp.sigma2, hp.sigma2_v, row_rng)
                       .transpose();
    });
    if (sweep > burn_in && (sweep - burn_in) % lag == 0) chain.samples.push_back(f);
  }
  return chain;
}

/// Log of the equal-weight predictive mixture
/// (1/K) sum_k N(value | <u_i^(k), v_j^(k)>, sigma2), via log-sum-exp.
inline double bpmf_predictive_log_density(const GibbsChain& chain, int row, int col,
                                          double value, double sigma2) {
  if (chain.samples.empty()) throw ValidationError("bpmf_predictive_log_density: empty chain");
  const double log_norm = -0.5 * std::log(2.0 * M_PI * sigma2);
  double max_term = -std::numeric_limits<double>::infinity();
  std::vector<double> terms;
  terms.reserve(chain.samples.size());
  for (const auto& f : chain.samples) {
    const double mu = f.u.row(row).dot(f.v.row(col));
    const double t = log_norm - (value - mu) * (value - mu) / (2.0 * sigma2);
    terms.push_back(t);
    max_term = std::max(max_term, t);
  }
  double sum = 0.0;
  for (double t : terms) sum += std::exp(t - max_term);
  return max_term + std::log(sum) - std::log(static_cast<double>(terms.size()));
}

/// Mean and variance of the same predictive mixture.
inline std::pair<double, double> bpmf_predictive_moments(const GibbsChain& chain, int row,
                                                         int col, double sigma2) {
  double sum = 0.0, sum_sq = 0.0;
  for (const auto& f : chain.samples) {
    const double mu = f.u.row(row).dot(f.v.row(col));
    sum += mu;
    sum_sq += mu * mu;
  }
  const double k = static_cast<double>(chain.samples.size());
  const double mean = sum / k;
  return {mean, sigma2 + sum_sq / k - mean * mean};
}

}  // namespace mgig
