#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "mgig/data.hpp"
#include "mgig/errors.hpp"
#include "mgig/pmf.hpp"
#include "mgig/rng.hpp"

namespace mgig {

struct HeldOutEntry {
  int row;
  int col;
  double value;
};

struct HeldOutSet {
  std::vector<HeldOutEntry> entries;
  int fold_id = 0;
  std::uint64_t seed = 0;
  double delta = 0.0;
};

struct LogLossResult {
  double mean = 0.0;               // over finite per-entry losses
  std::int64_t nonfinite_count = 0;  // reported separately, never clipped
  std::int64_t count = 0;            // total entries
};

/// Mean negative log predictive density. Entries whose density is zero or
/// non-finite are counted instead of clipped, mirroring how failures should
/// surface rather than hide.
inline LogLossResult log_loss(const std::vector<double>& log_densities) {
  if (log_densities.empty()) throw ValidationError("log_loss: no entries");
  LogLossResult out;
  out.count = static_cast<std::int64_t>(log_densities.size());
  double sum = 0.0;
  std::int64_t finite = 0;
  for (double ld : log_densities) {
    if (std::isfinite(ld)) {
      sum += -ld;
      ++finite;
    } else {
      ++out.nonfinite_count;
    }
  }
  out.mean = finite > 0 ? sum / finite : std::numeric_limits<double>::quiet_NaN();
  return out;
}

struct PercentileReport {
  std::array<double, 10> batch_means{};  // cumulative 10%..100% batches
  double overall = 0.0;                  // mean over finite losses
  std::int64_t nonfinite_count = 0;
};

/// Sorts per-entry losses ascending and reports the mean of each cumulative
/// 10%-step batch: batch k covers the ceil(k T / 10) best-predicted entries.
inline PercentileReport percentile_batches(const std::vector<double>& per_entry_losses) {
  if (per_entry_losses.empty()) throw ValidationError("percentile_batches: no entries");
  std::vector<double> losses;
  losses.reserve(per_entry_losses.size());
  PercentileReport out;
  for (double l : per_entry_losses) {
    if (std::isfinite(l)) {
      losses.push_back(l);
    } else {
      ++out.nonfinite_count;
    }
  }
  if (losses.empty()) {
    out.batch_means.fill(std::numeric_limits<double>::quiet_NaN());
    out.overall = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  std::sort(losses.begin(), losses.end());
  std::vector<double> prefix(losses.size() + 1, 0.0);
  for (std::size_t i = 0; i < losses.size(); ++i) prefix[i + 1] = prefix[i] + losses[i];
  const std::int64_t t = static_cast<std::int64_t>(losses.size());
  for (int k = 1; k <= 10; ++k) {
    const std::int64_t cut = (k * t + 9) / 10;
    out.batch_means[static_cast<std::size_t>(k - 1)] =
        prefix[static_cast<std::size_t>(cut)] / static_cast<double>(cut);
  }
  out.overall = prefix.back() / static_cast<double>(t);
  return out;
}

inline double rmse(const std::vector<double>& predicted, const std::vector<double>& truth) {
  if (predicted.size() != truth.size() || predicted.empty()) {
    throw ValidationError("rmse: size mismatch or empty input");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double d = predicted[i] - truth[i];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(predicted.size()));
}

/// Deterministic fold assignment from the entry coordinates and the seed.
inline int fold_of(int row, int col, std::uint64_t seed, int n_folds) {
  const std::uint64_t h = splitmix64(
      splitmix64(seed ^ (static_cast<std::uint64_t>(row) + 0x9E3779B97F4A7C15ull)) ^
      static_cast<std::uint64_t>(col));
  return static_cast<int>(h % static_cast<std::uint64_t>(n_folds));
}

struct SyntheticData {
  ObservedMatrix observed;
  HeldOutSet held_out;  // the dropped entries with their true values
  FactorPair factors;
  std::int64_t regenerated_columns = 0;
};

/// Generative process: rows of U from N(0, sigma_u^2 I), rows of V from
/// N(0, sigma_v^2 I), x_nm from N(<u_n, v_m>, sigma^2), then entries dropped
/// by independent Bernoulli(delta). Columns left with no observed entry get
/// their drop mask redrawn (counted). Dropped entries form the held-out set.
inline SyntheticData generate_synthetic(int n, int m, int d, double sigma2_u, double sigma2_v,
                                        double sigma2, double delta, const SeededRng& rng) {
  if (n < 1 || m < 1 || d < 1) throw ValidationError("generate_synthetic: bad shape");
  if (!(delta >= 0.0 && delta < 1.0)) {
    throw ValidationError("generate_synthetic: delta must lie in [0, 1)");
  }
  SeededRng local = rng;
  const double su = std::sqrt(sigma2_u), sv = std::sqrt(sigma2_v), s = std::sqrt(sigma2);

  FactorPair f{Matrix(n, d), Matrix(m, d)};
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < d; ++k) f.u(i, k) = su * local.normal();
  }
  for (int j = 0; j < m; ++j) {
    for (int k = 0; k < d; ++k) f.v(j, k) = sv * local.normal();
  }
  Matrix values(n, m);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) values(i, j) = f.u.row(i).dot(f.v.row(j)) + s * local.normal();
  }
  std::vector<std::uint8_t> keep(static_cast<std::size_t>(n) * m, 1);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      if (local.uniform01() < delta) keep[static_cast<std::size_t>(i) * m + j] = 0;
    }
  }
  std::int64_t regenerated = 0;
  for (int j = 0; j < m; ++j) {
    bool any = false;
    while (!any) {
      for (int i = 0; i < n; ++i) any = any || keep[static_cast<std::size_t>(i) * m + j];
      if (any) break;
      ++regenerated;
      for (int i = 0; i < n; ++i) {
        keep[static_cast<std::size_t>(i) * m + j] = local.uniform01() < delta ? 0 : 1;
      }
    }
  }

  Matrix masked = values;
  HeldOutSet held;
  held.seed = rng.seed();
  held.delta = delta;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      if (!keep[static_cast<std::size_t>(i) * m + j]) {
        masked(i, j) = std::nan("");
        held.entries.push_back(HeldOutEntry{i, j, values(i, j)});
      }
    }
  }
  return SyntheticData{ObservedMatrix::from_dense(masked), std::move(held), std::move(f),
                       regenerated};
}

}  // namespace mgig
