#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "mgig/errors.hpp"
#include "mgig/linalg.hpp"

namespace mgig {

using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

/// 2N x 2N block matrix [[A, R], [-Q, -A^T]].
struct HamiltonianMatrix {
  Matrix a;
  SymmetricMatrix r;
  SymmetricMatrix q;

  HamiltonianMatrix(Matrix a_in, SymmetricMatrix r_in, SymmetricMatrix q_in)
      : a(std::move(a_in)), r(std::move(r_in)), q(std::move(q_in)) {
    if (a.rows() != a.cols() || a.rows() != r.dim() || a.rows() != q.dim()) {
      throw DimensionMismatch("HamiltonianMatrix: block dimensions disagree");
    }
  }

  int block_dim() const { return static_cast<int>(a.rows()); }
  int dim() const { return 2 * block_dim(); }

  Matrix assemble() const {
    const int n = block_dim();
    Matrix h(2 * n, 2 * n);
    h.topLeftCorner(n, n) = a;
    h.topRightCorner(n, n) = r.mat();
    h.bottomLeftCorner(n, n) = -q.mat();
    h.bottomRightCorner(n, n) = -a.transpose();
    return h;
  }
};

/// A^T X + X A + X R X + Q = 0.
struct AreProblem {
  Matrix a;
  SymmetricMatrix r;
  SymmetricMatrix q;

  HamiltonianMatrix hamiltonian() const { return HamiltonianMatrix(a, r, q); }
};

struct UnimodalityCertificate {
  bool has_imaginary = false;
  ComplexVector eigenvalues;  // all 2N, sorted by (re, im)
};

namespace detail {

inline void sort_complex(ComplexVector& v) {
  std::vector<std::complex<double>> tmp(v.data(), v.data() + v.size());
  std::sort(tmp.begin(), tmp.end(), [](const auto& x, const auto& y) {
    if (x.real() != y.real()) return x.real() < y.real();
    return x.imag() < y.imag();
  });
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = tmp[static_cast<std::size_t>(i)];
}

/// Swaps the eigenvalues at positions (k, k+1) of a complex Schur form
/// T = U^H H U by a unitary similarity, updating T and U in place.
inline void schur_swap_adjacent(ComplexMatrix& t, ComplexMatrix& u, Eigen::Index k) {
  using C = std::complex<double>;
  const C a = t(k, k);
  const C b = t(k, k + 1);
  const C c = t(k + 1, k + 1);
  // Eigenvector of [[a, b], [0, c]] for eigenvalue c.
  const C x0 = b;
  const C x1 = c - a;
  const double nrm = std::sqrt(std::norm(x0) + std::norm(x1));
  if (nrm <= 1e-300) return;  // equal eigenvalues, nothing to move
  Eigen::Matrix2cd g;
  g << x0 / nrm, -std::conj(x1 / nrm), x1 / nrm, std::conj(x0 / nrm);
  t.middleRows(k, 2) = (g.adjoint() * t.middleRows(k, 2)).eval();
  t.middleCols(k, 2) = (t.middleCols(k, 2) * g).eval();
  t(k + 1, k) = C(0.0, 0.0);
  u.middleCols(k, 2) = (u.middleCols(k, 2) * g).eval();
}

/// Reorders the Schur form so the eigenvalues selected by `pick` occupy the
/// leading positions, preserving T upper-triangular and U unitary.
template <typename Pred>
inline void schur_reorder(ComplexMatrix& t, ComplexMatrix& u, const Pred& pick) {
  const Eigen::Index n = t.rows();
  Eigen::Index front = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (!pick(t(j, j))) continue;
    for (Eigen::Index k = j; k > front; --k) schur_swap_adjacent(t, u, k - 1);
    ++front;
  }
}

}  // namespace detail

/// Eigenvalue certificate: flags eigenvalues on the imaginary axis
/// (|Re| <= tol while |Im| > tol), which would rule out a unique positive
/// definite solution of the associated equation.
inline UnimodalityCertificate hamiltonian_eigen_check(const HamiltonianMatrix& h, double tol) {
  Eigen::EigenSolver<Matrix> solver(h.assemble(), /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceFailure("hamiltonian_eigen_check: eigensolver did not converge");
  }
  UnimodalityCertificate cert;
  cert.eigenvalues = solver.eigenvalues();
  detail::sort_complex(cert.eigenvalues);
  for (Eigen::Index i = 0; i < cert.eigenvalues.size(); ++i) {
    const auto& ev = cert.eigenvalues[i];
    if (std::abs(ev.real()) <= tol && std::abs(ev.imag()) > tol) {
      cert.has_imaginary = true;
    }
  }
  return cert;
}

/// Solves A^T X + X A + X R X + Q = 0 for the symmetric positive definite
/// solution via a reordered Schur form of the Hamiltonian: the leading N
/// columns of the reordered basis give [X1; X2] and X = X2 X1^{-1}.
///
/// The positive definite solution belongs to the invariant subspace whose
/// eigenvalues have positive real part under this sign convention; when that
/// side fails the definiteness check the opposite subspace is tried before
/// giving up.
inline SpdMatrix solve_are_schur(const AreProblem& p) {
  const int n = static_cast<int>(p.a.rows());
  const Matrix h = p.hamiltonian().assemble();
  const double scale = std::max(1.0, h.norm());

  Eigen::ComplexSchur<ComplexMatrix> schur(h.cast<std::complex<double>>());
  if (schur.info() != Eigen::Success) {
    throw ConvergenceFailure("solve_are_schur: Schur decomposition did not converge");
  }

  {
    const ComplexVector evs = schur.matrixT().diagonal();
    int positive = 0;
    for (Eigen::Index i = 0; i < evs.size(); ++i) {
      if (std::abs(evs[i].real()) <= 1e-11 * scale && std::abs(evs[i].imag()) > 1e-11 * scale) {
        throw NoStabilizingSolution(
            "solve_are_schur: Hamiltonian has imaginary-axis eigenvalues");
      }
      if (evs[i].real() > 0.0) ++positive;
    }
    if (positive != n) {
      throw NoStabilizingSolution(
          "solve_are_schur: eigenvalues do not split evenly across the imaginary axis");
    }
  }

  const auto extract = [&](bool positive_side) -> Matrix {
    ComplexMatrix t = schur.matrixT();
    ComplexMatrix u = schur.matrixU();
    detail::schur_reorder(t, u, [&](const std::complex<double>& ev) {
      return positive_side ? ev.real() > 0.0 : ev.real() < 0.0;
    });
    const ComplexMatrix x1 = u.topLeftCorner(n, n);
    const ComplexMatrix x2 = u.bottomLeftCorner(n, n);

    Eigen::JacobiSVD<ComplexMatrix> svd(x1);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(svd.singularValues().size() - 1);
    if (!(smin > 1e-12 * smax)) {
      throw SingularX1("solve_are_schur: leading subspace block is numerically singular");
    }
    // X = X2 X1^{-1}, via X1^T X^T = X2^T.
    ComplexMatrix xt = x1.transpose().partialPivLu().solve(x2.transpose());
    Matrix x = xt.transpose().real();
    return (x + x.transpose()) / 2.0;
  };

  try {
    return SpdMatrix::cholesky(SymmetricMatrix::symmetrized(extract(true)));
  } catch (const NotPositiveDefinite&) {
    return SpdMatrix::cholesky(SymmetricMatrix::symmetrized(extract(false)));
  }
}

/// Relative residual of a candidate solution of A^T X + X A + X R X + Q = 0.
inline double are_residual(const AreProblem& p, const Matrix& x) {
  const Matrix res = p.a.transpose() * x + x * p.a + x * p.r.mat() * x + p.q.mat();
  const double denom = p.q.mat().norm() + x.norm() * x.norm() * p.r.mat().norm();
  return res.norm() / std::max(1e-300, denom);
}

}  // namespace mgig
