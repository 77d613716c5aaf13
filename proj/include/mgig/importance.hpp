#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "mgig/distribution.hpp"
#include "mgig/errors.hpp"
#include "mgig/parallel.hpp"

namespace mgig {

struct WeightedSpdSample {
  SpdDraw draw;
  double log_weight;
};

struct ImportanceSummary {
  std::int64_t num_samples;           // requested draws
  double ess;
  SymmetricMatrix mean_estimate;      // self-normalized E[L]
  SymmetricMatrix inv_mean_estimate;  // self-normalized E[L^{-1}]
  double log_weight_max;
  std::int64_t degenerate_count;
};

/// (sum w)^2 / sum w^2 after max-subtraction in log space. NaN entries are
/// ignored; -inf entries are legitimate zero weights. Throws when nothing
/// usable remains.
inline double ess(const std::vector<double>& log_weights) {
  double max_lw = -std::numeric_limits<double>::infinity();
  for (double lw : log_weights) {
    if (std::isnan(lw)) continue;
    max_lw = std::max(max_lw, lw);
  }
  if (!std::isfinite(max_lw)) {
    throw AllWeightsDegenerate("ess: no finite log weight");
  }
  double sum = 0.0, sum_sq = 0.0;
  for (double lw : log_weights) {
    if (std::isnan(lw)) continue;
    const double w = std::exp(lw - max_lw);
    sum += w;
    sum_sq += w * w;
  }
  return sum * sum / sum_sq;
}

/// Self-normalized weighted average of f over the samples.
inline SymmetricMatrix estimate_functional(
    const std::vector<WeightedSpdSample>& samples,
    const std::function<Matrix(const SpdDraw&)>& f) {
  double max_lw = -std::numeric_limits<double>::infinity();
  for (const auto& s : samples) {
    if (std::isfinite(s.log_weight)) max_lw = std::max(max_lw, s.log_weight);
  }
  if (!std::isfinite(max_lw)) {
    throw AllWeightsDegenerate("estimate_functional: no finite log weight");
  }
  Matrix acc;
  double total = 0.0;
  for (const auto& s : samples) {
    if (!std::isfinite(s.log_weight)) continue;
    const double w = std::exp(s.log_weight - max_lw);
    if (acc.size() == 0) {
      acc = w * f(s.draw);
    } else {
      acc += w * f(s.draw);
    }
    total += w;
  }
  return SymmetricMatrix::symmetrized(acc / total);
}

struct ImportanceResult {
  std::vector<WeightedSpdSample> samples;  // finite-weight draws only
  ImportanceSummary summary;
};

/// Draws `s` proposal samples (draw i on rng.stream(i), so results do not
/// depend on the worker count), weights them against the target, and reduces
/// the summary in index order. Draws with non-finite log weight are dropped
/// and counted, never imputed.
inline ImportanceResult importance_sample(const MgigParams& p, const ProposalDistribution& q,
                                          std::int64_t s, const SeededRng& rng,
                                          int workers = 1) {
  if (s < 1) throw ValidationError("importance_sample: need at least one sample");
  if (q.dim() != p.dim()) {
    throw DimensionMismatch("importance_sample: proposal dimension mismatch");
  }

  std::vector<std::optional<WeightedSpdSample>> slots(static_cast<std::size_t>(s));
  parallel_for(s, workers, [&](std::int64_t i) {
    SeededRng stream = rng.stream(static_cast<std::uint64_t>(i));
    SpdDraw draw = q.sample(stream);
    const double lw = mgig_log_density_unnorm(draw, p) - q.log_density_unnorm(draw);
    slots[static_cast<std::size_t>(i)].emplace(WeightedSpdSample{std::move(draw), lw});
  });

  std::vector<WeightedSpdSample> samples;
  samples.reserve(slots.size());
  std::int64_t degenerate = 0;
  double log_weight_max = -std::numeric_limits<double>::infinity();
  for (auto& slot : slots) {
    if (std::isfinite(slot->log_weight)) {
      log_weight_max = std::max(log_weight_max, slot->log_weight);
      samples.push_back(std::move(*slot));
    } else {
      ++degenerate;
    }
  }
  if (samples.empty()) {
    throw AllWeightsDegenerate("importance_sample: every log weight was non-finite");
  }

  std::vector<double> log_weights;
  log_weights.reserve(samples.size());
  for (const auto& ws : samples) log_weights.push_back(ws.log_weight);
  ImportanceSummary summary{
      s,
      ess(log_weights),
      estimate_functional(samples, [](const SpdDraw& d) { return d.lambda.mat(); }),
      estimate_functional(samples, [](const SpdDraw& d) { return d.inv_lambda.mat(); }),
      log_weight_max,
      degenerate};
  return ImportanceResult{std::move(samples), std::move(summary)};
}

/// Log weight of a mode-matched Wishart proposal in collapsed form:
/// (nu - rho/2) log|L| - Tr(Psi L^{-1} + [Phi - Sigma^{-1}] L)/2.
/// Must agree with the generic target-minus-proposal computation.
inline double mode_matched_wishart_log_weight(const SpdDraw& lam, const MgigParams& p,
                                              const WishartParams& q) {
  const Matrix inv_scale = q.scale.inverse();
  const double tr_psi = (p.psi().mat().array() * lam.inv_lambda.mat().array()).sum();
  const double tr_rest =
      ((p.phi().mat() - inv_scale).array() * lam.lambda.mat().array()).sum();
  return (p.nu() - q.dof / 2.0) * lam.log_det - 0.5 * (tr_psi + tr_rest);
}

}  // namespace mgig
