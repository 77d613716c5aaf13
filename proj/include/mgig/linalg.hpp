#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <string>
#include <utility>

#include "mgig/errors.hpp"

namespace mgig {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Dense symmetric matrix. Construction symmetrizes the storage, so
/// entries(i,j) == entries(j,i) holds exactly afterwards.
class SymmetricMatrix {
 public:
  /// Checks that `m` is square and symmetric up to `tol` (relative), then
  /// stores (m + m^T)/2.
  explicit SymmetricMatrix(const Matrix& m, double tol = 1e-10)
      : mat_(checked(m, tol)) {}

  /// Accepts any square matrix and symmetrizes it without complaint.
  static SymmetricMatrix symmetrized(const Matrix& m) {
    return SymmetricMatrix((m + m.transpose()) / 2.0, std::numeric_limits<double>::infinity());
  }

  static SymmetricMatrix identity(int n) { return SymmetricMatrix(Matrix::Identity(n, n)); }

  int dim() const { return static_cast<int>(mat_.rows()); }
  const Matrix& mat() const { return mat_; }
  double operator()(int i, int j) const { return mat_(i, j); }

 private:
  static Matrix checked(const Matrix& m, double tol) {
    if (m.rows() != m.cols() || m.rows() < 1) {
      throw DimensionMismatch("SymmetricMatrix: matrix must be square, dim >= 1");
    }
    const double asym = (m - m.transpose()).norm();
    if (!(asym <= tol * std::max(1.0, m.norm()))) {
      throw ValidationError("SymmetricMatrix: input is not symmetric (asymmetry " +
                            std::to_string(asym) + ")");
    }
    return (m + m.transpose()) / 2.0;
  }

  Matrix mat_;
};

/// Symmetric positive definite matrix carrying a cached upper-triangular
/// Cholesky factor R with R^T R = mat, and log|mat| derived from diag(R).
/// The factor is computed once on first use and shared between copies.
class SpdMatrix {
 public:
  /// Factorizes immediately; throws NotPositiveDefinite when a pivot fails.
  static SpdMatrix cholesky(const SymmetricMatrix& m) {
    SpdMatrix out(m);
    out.factor();  // certify membership of the SPD cone now
    return out;
  }

  /// Adopts a known factor: R upper-triangular with positive diagonal,
  /// base = R^T R.
  static SpdMatrix from_factor_upper(const Matrix& r) {
    SpdMatrix out(SymmetricMatrix::symmetrized(r.transpose() * r));
    auto& cache = *out.cache_;
    cache.r = r.triangularView<Eigen::Upper>();
    cache.log_det = 2.0 * cache.r.diagonal().array().log().sum();
    cache.ready = true;
    return out;
  }

  /// Defers factorization until someone asks for it. Only for matrices that
  /// are SPD by construction (e.g. triangular inverses of certified factors).
  static SpdMatrix trusted(const SymmetricMatrix& m) { return SpdMatrix(m); }

  int dim() const { return base_.dim(); }
  const Matrix& mat() const { return base_.mat(); }
  const SymmetricMatrix& sym() const { return base_; }

  /// Upper-triangular R with R^T R = mat().
  const Matrix& chol_upper() const { return factor().r; }

  /// log|mat| = 2 * sum_i log R_ii.
  double log_det() const { return factor().log_det; }

  /// Solves mat * x = rhs through the triangular factor.
  Matrix solve(const Matrix& rhs) const {
    const Matrix& r = chol_upper();
    Matrix y = r.transpose().triangularView<Eigen::Lower>().solve(rhs);
    return r.triangularView<Eigen::Upper>().solve(y);
  }

  /// Explicit inverse via two triangular solves. Not cached; callers that
  /// evaluate many traces against the inverse should keep the result.
  Matrix inverse() const {
    const Matrix& r = chol_upper();
    Matrix rinv = r.triangularView<Eigen::Upper>().solve(Matrix::Identity(dim(), dim()));
    Matrix inv = rinv * rinv.transpose();
    return (inv + inv.transpose()) / 2.0;
  }

 private:
  struct Cache {
    std::once_flag once;
    Matrix r;
    double log_det = 0.0;
    bool ready = false;
  };

  explicit SpdMatrix(const SymmetricMatrix& m)
      : base_(m), cache_(std::make_shared<Cache>()) {}

  const Cache& factor() const {
    Cache& cache = *cache_;
    if (cache.ready) return cache;
    std::call_once(cache.once, [&] {
      Eigen::LLT<Matrix> llt(base_.mat());
      if (llt.info() != Eigen::Success) {
        throw NotPositiveDefinite("SpdMatrix: Cholesky factorization failed (matrix not SPD)");
      }
      cache.r = llt.matrixU();
      cache.log_det = 2.0 * cache.r.diagonal().array().log().sum();
      cache.ready = true;
    });
    return cache;
  }

  SymmetricMatrix base_;
  std::shared_ptr<Cache> cache_;
};

/// Upper-triangular Cholesky factorization, certifying SPD membership.
inline SpdMatrix cholesky(const SymmetricMatrix& m) { return SpdMatrix::cholesky(m); }

struct SymEigen {
  Vector eigenvalues;   // ascending
  Matrix eigenvectors;  // orthonormal columns, m = V diag(l) V^T
};

inline SymEigen sym_eigen(const SymmetricMatrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m.mat());
  if (solver.info() != Eigen::Success) {
    throw ConvergenceFailure("sym_eigen: eigensolver did not converge");
  }
  return SymEigen{solver.eigenvalues(), solver.eigenvectors()};
}

/// Symmetric square root: result S with S * S = m.
inline SpdMatrix spd_sqrt(const SpdMatrix& m) {
  const SymEigen eig = sym_eigen(m.sym());
  if (eig.eigenvalues.minCoeff() <= 0.0) {
    throw NotPositiveDefinite("spd_sqrt: nonpositive eigenvalue");
  }
  Matrix s = eig.eigenvectors * eig.eigenvalues.array().sqrt().matrix().asDiagonal() *
             eig.eigenvectors.transpose();
  return SpdMatrix::cholesky(SymmetricMatrix::symmetrized(s));
}

/// Relative Frobenius distance, with a floor so zero targets compare sanely.
inline double rel_error(const Matrix& actual, const Matrix& expected) {
  return (actual - expected).norm() / std::max(1e-300, expected.norm());
}

}  // namespace mgig
