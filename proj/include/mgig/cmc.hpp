#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "mgig/data.hpp"
#include "mgig/distribution.hpp"
#include "mgig/errors.hpp"
#include "mgig/importance.hpp"
#include "mgig/parallel.hpp"
#include "mgig/pmf.hpp"

namespace mgig {

enum class GapFillMethod { zero_pad, pmf_point_estimate };

struct GapFillResult {
  Matrix z;            // dense N x M working matrix
  Vector row_offsets;  // per-row centering removed from observed entries
  bool pmf_converged = true;
};

/// Dense stand-in for the partially observed matrix. zero_pad centers the
/// observed entries by per-row observed means (rows are the Gaussian
/// dimension of the column model; pass center = false for data already
/// centered) and sets missing entries to zero; pmf_point_estimate keeps
/// observed entries verbatim and fills missing ones with the MAP
/// reconstruction.
inline GapFillResult gap_fill(const ObservedMatrix& x, GapFillMethod method,
                              const PmfHyperParams& hp, SeededRng& rng,
                              int pmf_max_iters = 200, double pmf_tol = 1e-7,
                              bool center = true) {
  const int n = x.rows(), m = x.cols();
  GapFillResult out;
  out.row_offsets = Vector::Zero(n);
  out.z = Matrix::Zero(n, m);
  if (method == GapFillMethod::zero_pad) {
    for (int i = 0; i < n; ++i) {
      const auto& obs = x.observed_in_row(i);
      if (obs.empty()) continue;
      double mean = 0.0;
      if (center) {
        for (int j : obs) mean += x.value(i, j);
        mean /= static_cast<double>(obs.size());
      }
      out.row_offsets[i] = mean;
      for (int j : obs) out.z(i, j) = x.value(i, j) - mean;
    }
    return out;
  }
  PmfResult fit = pmf_map(x, hp, pmf_max_iters, pmf_tol, rng);
  out.pmf_converged = fit.converged;
  out.z = pmf_reconstruction(fit.factors);
  for (int i = 0; i < n; ++i) {
    for (int j : x.observed_in_row(i)) out.z(i, j) = x.value(i, j);
  }
  return out;
}

/// Posterior over the row-covariance structure of the gap-filled data:
/// Psi = Z Z^T / sigma_v^2 (ridge-repaired when numerically singular),
/// Phi = I / sigma_u^2, nu = (N - M + 1)/2.
struct CollapsedPosterior {
  MgigParams mgig;
  double beta_v;  // sigma^2 / sigma_v^2; recorded, not used in prediction
  GapFillMethod gap_fill_method;
  Vector row_offsets;
  bool pmf_converged = true;
};

inline CollapsedPosterior build_collapsed_posterior(const ObservedMatrix& x,
                                                    const PmfHyperParams& hp,
                                                    GapFillMethod method, SeededRng& rng,
                                                    int pmf_max_iters = 200,
                                                    double pmf_tol = 1e-7,
                                                    bool center = true) {
  const int n = x.rows(), m = x.cols();
  GapFillResult fill = gap_fill(x, method, hp, rng, pmf_max_iters, pmf_tol, center);
  Matrix psi_raw = fill.z * fill.z.transpose() / hp.sigma2_v;
  std::optional<SpdMatrix> psi;
  try {
    psi.emplace(SpdMatrix::cholesky(SymmetricMatrix::symmetrized(psi_raw)));
  } catch (const NotPositiveDefinite&) {
    const double ridge = 1e-8 * psi_raw.trace() / n;
    psi_raw += ridge * Matrix::Identity(n, n);
    try {
      psi.emplace(SpdMatrix::cholesky(SymmetricMatrix::symmetrized(psi_raw)));
    } catch (const NotPositiveDefinite&) {
      throw DegenerateCovariance(
          "build_collapsed_posterior: Z Z^T is rank-deficient beyond ridge repair");
    }
  }
  SpdMatrix phi = SpdMatrix::cholesky(
      SymmetricMatrix::symmetrized(Matrix::Identity(n, n) / hp.sigma2_u));
  const double nu = (n - m + 1) / 2.0;
  return CollapsedPosterior{MgigParams(std::move(*psi), std::move(phi), nu),
                            hp.sigma2 / hp.sigma2_v, method, std::move(fill.row_offsets),
                            fill.pmf_converged};
}

/// One partially observed column: indices into the row dimension plus the
/// centered observed values.
struct ColumnView {
  int col_index = -1;
  std::vector<int> observed_idx;
  std::vector<int> missing_idx;
  Vector observed_values;  // centered by row offsets
};

struct ColumnPrediction {
  int col_index = -1;
  std::vector<int> missing_indices;
  Vector mean;                // offsets added back
  SymmetricMatrix covariance;
  /// Per missing entry, log predictive density at the supplied truth
  /// (NaN where no truth was supplied).
  std::vector<double> log_densities;

  ColumnPrediction() : covariance(SymmetricMatrix::identity(1)) {}
};

/// Conditional Gaussian of the missing block given the observed block under
/// x ~ N(0, sigma2_v * Lambda): mean C_mo C_oo^{-1} x_o via one triangular
/// solve, covariance the Schur complement C_mm - C_mo C_oo^{-1} C_om,
/// symmetrized.
inline ColumnPrediction predict_column(const SpdMatrix& lambda, const ColumnView& col,
                                       double sigma2_v,
                                       const Vector* offsets = nullptr) {
  ColumnPrediction out;
  out.col_index = col.col_index;
  out.missing_indices = col.missing_idx;
  const int q = static_cast<int>(col.missing_idx.size());
  if (q == 0) return out;
  const int p = static_cast<int>(col.observed_idx.size());
  if (p == 0) throw ValidationError("predict_column: no observed entries in column");

  const Matrix& c = lambda.mat();
  Matrix c_oo(p, p), c_om(p, q), c_mm(q, q);
  for (int a = 0; a < p; ++a) {
    for (int b = 0; b < p; ++b) c_oo(a, b) = c(col.observed_idx[a], col.observed_idx[b]);
    for (int b = 0; b < q; ++b) c_om(a, b) = c(col.observed_idx[a], col.missing_idx[b]);
  }
  for (int a = 0; a < q; ++a) {
    for (int b = 0; b < q; ++b) c_mm(a, b) = c(col.missing_idx[a], col.missing_idx[b]);
  }
  c_oo *= sigma2_v;
  c_om *= sigma2_v;
  c_mm *= sigma2_v;

  Eigen::LLT<Matrix> llt((c_oo + c_oo.transpose()) / 2.0);
  if (llt.info() != Eigen::Success) {
    throw SingularObservedBlock("predict_column: observed block failed to factorize");
  }
  const Matrix solved = llt.solve(c_om);  // C_oo^{-1} C_om
  out.mean = solved.transpose() * col.observed_values;
  Matrix schur = c_mm - c_om.transpose() * solved;
  out.covariance = SymmetricMatrix::symmetrized(schur);
  if (offsets != nullptr) {
    for (int a = 0; a < q; ++a) out.mean[a] += (*offsets)[col.missing_idx[a]];
  }
  out.log_densities.assign(static_cast<std::size_t>(q),
                           std::numeric_limits<double>::quiet_NaN());
  return out;
}

inline ColumnPrediction predict_column(const SpdDraw& lam, const ColumnView& col,
                                       double sigma2_v, const Vector* offsets = nullptr) {
  return predict_column(lam.lambda, col, sigma2_v, offsets);
}

enum class CmcProposal { mode_wishart, mode_iw, baseline_wishart, baseline_iw };

struct CmcConfig {
  std::int64_t samples = 1000;
  std::optional<double> rho;  // default: curvature-matched at the mode
  CmcProposal proposal = CmcProposal::mode_wishart;
  bool scale_by_sigma_v = true;  // compatibility switch for the bare-Lambda variant
  GapFillMethod gap_fill = GapFillMethod::zero_pad;
  bool center = true;
  int pmf_max_iters = 200;
  double pmf_tol = 1e-7;
  int workers = 1;
};

/// Proposal dof matching the target's log-density curvature along the scaling
/// direction at the mode; clamped away from the validity boundary.
inline double curvature_matched_dof(const MgigParams& posterior, const SpdMatrix& mode,
                                    CmcProposal kind) {
  const int n = posterior.dim();
  const double a = mode.solve(posterior.psi().mat()).trace();
  const double base = 2.0 * posterior.alpha() + 2.0 * a / n;
  if (kind == CmcProposal::mode_iw) return std::max(base - n - 1.0, n + 2.0);
  return std::max(base + n + 1.0, n + 3.0);
}

struct CmcPrediction {
  std::vector<ColumnPrediction> columns;  // one per column with missing entries
  ImportanceSummary summary;
  std::int64_t singular_column_skips = 0;  // (sample, column) pairs skipped
  double proposal_dof = 0.0;
  std::string proposal_kind;
};

namespace detail {

inline ProposalDistribution make_cmc_proposal(const MgigParams& posterior,
                                              const SpdMatrix& mode, const CmcConfig& cfg) {
  switch (cfg.proposal) {
    case CmcProposal::mode_wishart:
      return build_mode_matched_wishart(
          posterior, cfg.rho.value_or(curvature_matched_dof(posterior, mode, cfg.proposal)));
    case CmcProposal::mode_iw:
      return build_mode_matched_iw(
          posterior, cfg.rho.value_or(curvature_matched_dof(posterior, mode, cfg.proposal)));
    case CmcProposal::baseline_wishart:
      return build_baseline_proposal(posterior, BaselineKind::wishart_factor);
    case CmcProposal::baseline_iw:
      return build_baseline_proposal(posterior, BaselineKind::iw_factor);
  }
  throw ValidationError("make_cmc_proposal: unknown proposal kind");
}

inline std::vector<ColumnView> build_column_views(const ObservedMatrix& x,
                                                  const Vector& offsets) {
  std::vector<ColumnView> views;
  for (int j = 0; j < x.cols(); ++j) {
    ColumnView view;
    view.col_index = j;
    for (int i = 0; i < x.rows(); ++i) {
      if (x.observed(i, j)) {
        view.observed_idx.push_back(i);
      } else {
        view.missing_idx.push_back(i);
      }
    }
    if (view.missing_idx.empty()) continue;  // nothing to predict
    view.observed_values.resize(static_cast<int>(view.observed_idx.size()));
    for (std::size_t a = 0; a < view.observed_idx.size(); ++a) {
      const int i = view.observed_idx[a];
      view.observed_values[static_cast<int>(a)] = x.value(i, j) - offsets[i];
    }
    views.push_back(std::move(view));
  }
  return views;
}

inline double gaussian_log_density(double x, double mean, double var) {
  return -0.5 * std::log(2.0 * M_PI * var) - (x - mean) * (x - mean) / (2.0 * var);
}

}  // namespace detail

/// Truths for held-out entries, in internal coordinates, used to evaluate
/// per-entry predictive log densities.
struct HeldOutTruths {
  // per column: (row, value) pairs
  std::vector<std::vector<std::pair<int, double>>> by_col;

  static HeldOutTruths none(int cols) {
    HeldOutTruths t;
    t.by_col.resize(static_cast<std::size_t>(cols));
    return t;
  }
};

/// Full sampler: draws once from the proposal, then per column accumulates
/// the weighted conditional means and covariances, and evaluates held-out
/// truths under the weighted mixture of conditional Gaussians. Per-column
/// factorization failures skip that sample for that column only.
inline CmcPrediction cmc_predict_full(const ObservedMatrix& x, const PmfHyperParams& hp,
                                      const CmcConfig& cfg, const SeededRng& rng,
                                      const HeldOutTruths* truths = nullptr) {
  SeededRng fill_rng = rng.stream(0);
  CollapsedPosterior posterior = build_collapsed_posterior(
      x, hp, cfg.gap_fill, fill_rng, cfg.pmf_max_iters, cfg.pmf_tol, cfg.center);
  const SpdMatrix mode = mgig_mode(posterior.mgig);
  const ProposalDistribution proposal = detail::make_cmc_proposal(posterior.mgig, mode, cfg);
  ImportanceResult is =
      importance_sample(posterior.mgig, proposal, cfg.samples, rng.stream(1), cfg.workers);

  // normalized weights over the surviving draws
  std::vector<double> weights(is.samples.size());
  {
    double sum = 0.0;
    for (std::size_t t = 0; t < is.samples.size(); ++t) {
      weights[t] = std::exp(is.samples[t].log_weight - is.summary.log_weight_max);
      sum += weights[t];
    }
    for (double& w : weights) w /= sum;
  }

  const double sigma2_v = cfg.scale_by_sigma_v ? hp.sigma2_v : 1.0;
  const std::vector<ColumnView> views = detail::build_column_views(x, posterior.row_offsets);
  std::vector<ColumnPrediction> predictions(views.size());
  std::vector<std::int64_t> skips(views.size(), 0);

  parallel_for(static_cast<std::int64_t>(views.size()), cfg.workers, [&](std::int64_t vi) {
    const ColumnView& view = views[static_cast<std::size_t>(vi)];
    const int q = static_cast<int>(view.missing_idx.size());
    const auto* col_truths =
        truths ? &truths->by_col[static_cast<std::size_t>(view.col_index)] : nullptr;

    Vector mean_acc = Vector::Zero(q);
    Matrix cov_acc = Matrix::Zero(q, q);
    double weight_acc = 0.0;
    const std::size_t n_truth = col_truths ? col_truths->size() : 0;
    // mixture log-sum-exp accumulators per truth entry
    std::vector<double> lse_max(n_truth, -std::numeric_limits<double>::infinity());
    std::vector<std::vector<double>> lse_terms(n_truth);

    std::vector<int> pos_of_row(x.rows(), -1);
    for (int a = 0; a < q; ++a) pos_of_row[view.missing_idx[a]] = a;

    for (std::size_t t = 0; t < is.samples.size(); ++t) {
      ColumnPrediction pred;
      try {
        pred = predict_column(is.samples[t].draw, view, sigma2_v, &posterior.row_offsets);
      } catch (const SingularObservedBlock&) {
        ++skips[static_cast<std::size_t>(vi)];
        continue;
      }
      const double w = weights[t];
      mean_acc += w * pred.mean;
      cov_acc += w * pred.covariance.mat();
      weight_acc += w;
      for (std::size_t e = 0; e < n_truth; ++e) {
        const auto& [row, value] = (*col_truths)[e];
        const int a = pos_of_row[row];
        if (a < 0) continue;  // truth given for an entry that is not missing
        const double term =
            std::log(w) +
            detail::gaussian_log_density(value, pred.mean[a], pred.covariance(a, a));
        lse_terms[e].push_back(term);
        lse_max[e] = std::max(lse_max[e], term);
      }
    }
    if (weight_acc <= 0.0) {
      throw SingularObservedBlock("cmc_predict_full: every sample failed for column " +
                                  std::to_string(view.col_index));
    }

    ColumnPrediction out;
    out.col_index = view.col_index;
    out.missing_indices = view.missing_idx;
    out.mean = mean_acc / weight_acc;
    out.covariance = SymmetricMatrix::symmetrized(cov_acc / weight_acc);
    out.log_densities.assign(static_cast<std::size_t>(q),
                             std::numeric_limits<double>::quiet_NaN());
    for (std::size_t e = 0; e < n_truth; ++e) {
      const auto& [row, value] = (*col_truths)[e];
      const int a = pos_of_row[row];
      if (a < 0 || lse_terms[e].empty()) continue;
      double sum = 0.0;
      for (double term : lse_terms[e]) sum += std::exp(term - lse_max[e]);
      out.log_densities[static_cast<std::size_t>(a)] =
          lse_max[e] + std::log(sum) - std::log(weight_acc);
    }
    predictions[static_cast<std::size_t>(vi)] = std::move(out);
  });

  CmcPrediction out;
  out.columns = std::move(predictions);
  out.summary = std::move(is.summary);
  for (std::int64_t s : skips) out.singular_column_skips += s;
  out.proposal_dof = proposal.dof();
  out.proposal_kind = proposal.kind_name();
  return out;
}

/// Mean sampler: estimates the posterior mean of Lambda from the weighted
/// draws, then runs a single conditional pass per column with that one
/// matrix. Predictive densities become single Gaussians.
inline CmcPrediction cmc_predict_mean_sampler(const ObservedMatrix& x,
                                              const PmfHyperParams& hp, const CmcConfig& cfg,
                                              const SeededRng& rng,
                                              const HeldOutTruths* truths = nullptr) {
  SeededRng fill_rng = rng.stream(0);
  CollapsedPosterior posterior = build_collapsed_posterior(
      x, hp, cfg.gap_fill, fill_rng, cfg.pmf_max_iters, cfg.pmf_tol, cfg.center);
  const SpdMatrix mode = mgig_mode(posterior.mgig);
  const ProposalDistribution proposal = detail::make_cmc_proposal(posterior.mgig, mode, cfg);
  ImportanceResult is =
      importance_sample(posterior.mgig, proposal, cfg.samples, rng.stream(1), cfg.workers);

  // posterior-mean matrix; a convex combination of SPD draws, so SPD
  const SpdMatrix lambda_bar = SpdMatrix::cholesky(is.summary.mean_estimate);

  const double sigma2_v = cfg.scale_by_sigma_v ? hp.sigma2_v : 1.0;
  const std::vector<ColumnView> views = detail::build_column_views(x, posterior.row_offsets);
  std::vector<ColumnPrediction> predictions(views.size());

  parallel_for(static_cast<std::int64_t>(views.size()), cfg.workers, [&](std::int64_t vi) {
    const ColumnView& view = views[static_cast<std::size_t>(vi)];
    ColumnPrediction pred = predict_column(lambda_bar, view, sigma2_v, &posterior.row_offsets);
    if (truths) {
      std::vector<int> pos_of_row(x.rows(), -1);
      for (std::size_t a = 0; a < view.missing_idx.size(); ++a) {
        pos_of_row[view.missing_idx[a]] = static_cast<int>(a);
      }
      for (const auto& [row, value] : truths->by_col[static_cast<std::size_t>(view.col_index)]) {
        const int a = pos_of_row[row];
        if (a < 0) continue;
        pred.log_densities[static_cast<std::size_t>(a)] =
            detail::gaussian_log_density(value, pred.mean[a], pred.covariance(a, a));
      }
    }
    predictions[static_cast<std::size_t>(vi)] = std::move(pred);
  });

  CmcPrediction out;
  out.columns = std::move(predictions);
  out.summary = std::move(is.summary);
  out.proposal_dof = proposal.dof();
  out.proposal_kind = proposal.kind_name();
  return out;
}

}  // namespace mgig
