#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mgig/errors.hpp"
#include "mgig/linalg.hpp"

namespace mgig {

struct MatrixEntry {
  int row;
  int col;
  double value;
};

/// Partially observed real matrix. Internally stored fat (rows <= cols),
/// transposing the input when needed; `transposed()` records the flip and the
/// to_internal/to_original maps convert coordinates. Every internal column
/// must carry at least one observed entry. Masked-out value slots hold zero
/// and are never read.
class ObservedMatrix {
 public:
  /// Dense input with NaN marking missing entries.
  static ObservedMatrix from_dense(const Matrix& values_with_nan) {
    const bool flip = values_with_nan.rows() > values_with_nan.cols();
    const Matrix oriented =
        flip ? Matrix(values_with_nan.transpose()) : values_with_nan;
    const int n = static_cast<int>(oriented.rows());
    const int m = static_cast<int>(oriented.cols());
    Matrix values = Matrix::Zero(n, m);
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(n) * m, 0);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j) {
        const double v = oriented(i, j);
        if (!std::isnan(v)) {
          values(i, j) = v;
          mask[static_cast<std::size_t>(i) * m + j] = 1;
        }
      }
    }
    return ObservedMatrix(std::move(values), std::move(mask), flip);
  }

  /// Sparse triplets in original orientation; dimensions inferred from the
  /// largest indices unless given. Duplicate coordinates are rejected.
  static ObservedMatrix from_triplets(const std::vector<MatrixEntry>& entries,
                                      int rows = -1, int cols = -1) {
    int max_row = -1, max_col = -1;
    for (const auto& e : entries) {
      if (e.row < 0 || e.col < 0) {
        throw ValidationError("ObservedMatrix: negative index in triplets");
      }
      max_row = std::max(max_row, e.row);
      max_col = std::max(max_col, e.col);
    }
    if (rows < 0) rows = max_row + 1;
    if (cols < 0) cols = max_col + 1;
    if (max_row >= rows || max_col >= cols) {
      throw ValidationError("ObservedMatrix: triplet index outside the stated shape");
    }
    if (rows < 1 || cols < 1) throw ValidationError("ObservedMatrix: empty shape");
    Matrix dense = Matrix::Constant(rows, cols, std::nan(""));
    for (const auto& e : entries) {
      if (!std::isnan(dense(e.row, e.col))) {
        throw DuplicateEntry("ObservedMatrix: duplicate entry at (" + std::to_string(e.row) +
                             ", " + std::to_string(e.col) + ")");
      }
      dense(e.row, e.col) = e.value;
    }
    return from_dense(dense);
  }

  int rows() const { return static_cast<int>(values_.rows()); }
  int cols() const { return static_cast<int>(values_.cols()); }
  bool transposed() const { return transposed_; }
  std::int64_t observed_count() const { return observed_count_; }

  bool observed(int i, int j) const {
    return mask_[static_cast<std::size_t>(i) * cols() + j] != 0;
  }

  double value(int i, int j) const { return values_(i, j); }

  const std::vector<int>& observed_in_row(int i) const { return row_obs_[i]; }
  const std::vector<int>& observed_in_col(int j) const { return col_obs_[j]; }

  std::pair<int, int> to_internal(int orig_row, int orig_col) const {
    return transposed_ ? std::pair{orig_col, orig_row} : std::pair{orig_row, orig_col};
  }
  std::pair<int, int> to_original(int row, int col) const {
    return transposed_ ? std::pair{col, row} : std::pair{row, col};
  }

  /// Copy with the given internal-coordinate entries masked out. Preserves
  /// orientation. Throws if a column would lose its last observed entry.
  ObservedMatrix masked_out(const std::vector<std::pair<int, int>>& internal) const {
    Matrix values = values_;
    std::vector<std::uint8_t> mask = mask_;
    for (const auto& [i, j] : internal) {
      mask[static_cast<std::size_t>(i) * cols() + j] = 0;
      values(i, j) = 0.0;
    }
    return ObservedMatrix(std::move(values), std::move(mask), transposed_);
  }

  /// True when removing `internal` would leave some column empty.
  bool would_empty_column(const std::vector<std::pair<int, int>>& internal) const {
    std::vector<int> removed(cols(), 0);
    for (const auto& [i, j] : internal) ++removed[j];
    for (int j = 0; j < cols(); ++j) {
      if (static_cast<int>(col_obs_[j].size()) - removed[j] < 1) return true;
    }
    return false;
  }

 private:
  ObservedMatrix(Matrix values, std::vector<std::uint8_t> mask, bool transposed)
      : values_(std::move(values)), mask_(std::move(mask)), transposed_(transposed) {
    const int n = rows(), m = cols();
    row_obs_.resize(n);
    col_obs_.resize(m);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j) {
        if (mask_[static_cast<std::size_t>(i) * m + j]) {
          row_obs_[i].push_back(j);
          col_obs_[j].push_back(i);
          ++observed_count_;
        }
      }
    }
    for (int j = 0; j < m; ++j) {
      if (col_obs_[j].empty()) {
        throw ValidationError("ObservedMatrix: column " + std::to_string(j) +
                              " has no observed entries");
      }
    }
  }

  Matrix values_;
  std::vector<std::uint8_t> mask_;
  bool transposed_ = false;
  std::vector<std::vector<int>> row_obs_;
  std::vector<std::vector<int>> col_obs_;
  std::int64_t observed_count_ = 0;
};

}  // namespace mgig
