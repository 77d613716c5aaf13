#pragma once

#include <cmath>
#include <string>
#include <utility>

#include "mgig/errors.hpp"
#include "mgig/linalg.hpp"
#include "mgig/riccati.hpp"
#include "mgig/wishart.hpp"

namespace mgig {

/// Parameters of the matrix generalized inverse Gaussian distribution over
/// N x N SPD matrices: density proportional to
///   |L|^(nu - (N+1)/2) exp{-Tr(Psi L^{-1} + Phi L)/2}.
class MgigParams {
 public:
  MgigParams(SpdMatrix psi, SpdMatrix phi, double nu)
      : psi_(std::move(psi)), phi_(std::move(phi)), nu_(nu) {
    if (psi_.dim() != phi_.dim()) {
      throw DimensionMismatch("MgigParams: psi and phi dimensions disagree");
    }
  }

  int dim() const { return psi_.dim(); }
  const SpdMatrix& psi() const { return psi_; }
  const SpdMatrix& phi() const { return phi_; }
  double nu() const { return nu_; }
  double alpha() const { return nu_ - (dim() + 1) / 2.0; }

 private:
  SpdMatrix psi_;
  SpdMatrix phi_;
  double nu_;
};

/// alpha log|L| - Tr(Psi L^{-1})/2 - Tr(Phi L)/2, using the draw's cached
/// inverse and log-determinant. Exact up to the additive normalizer.
inline double mgig_log_density_unnorm(const SpdDraw& lam, const MgigParams& p) {
  if (lam.dim() != p.dim()) {
    throw DimensionMismatch("mgig_log_density_unnorm: dimension mismatch");
  }
  const double tr_psi = (p.psi().mat().array() * lam.inv_lambda.mat().array()).sum();
  const double tr_phi = (p.phi().mat().array() * lam.lambda.mat().array()).sum();
  return p.alpha() * lam.log_det - 0.5 * tr_psi - 0.5 * tr_phi;
}

/// Parameters of the distribution of L^{-1}: (Phi, Psi, -nu). An involution.
inline MgigParams mgig_invert_params(const MgigParams& p) {
  return MgigParams(p.phi(), p.psi(), -p.nu());
}

/// Relative residual of the stationarity equation
/// -2 alpha L + L Phi L - Psi = 0 at a candidate mode.
inline double mgig_mode_residual(const Matrix& mode, const MgigParams& p) {
  const Matrix res =
      -2.0 * p.alpha() * mode + mode * p.phi().mat() * mode - p.psi().mat();
  return res.norm() / p.psi().mat().norm();
}

/// Mode of the distribution, in closed form: with S = Phi^{1/2} Psi Phi^{1/2},
///   L* = Phi^{-1/2} (alpha I + (S + alpha^2 I)^{1/2}) Phi^{-1/2},
/// which is SPD for every real alpha since its eigenvalues are
/// alpha + sqrt(s_i + alpha^2) > 0.
inline SpdMatrix mgig_mode(const MgigParams& p) {
  const double alpha = p.alpha();
  const SymEigen phi_eig = sym_eigen(p.phi().sym());
  if (phi_eig.eigenvalues.minCoeff() <= 0.0) {
    throw NotPositiveDefinite("mgig_mode: phi is not positive definite");
  }
  const Matrix& v = phi_eig.eigenvectors;
  const Vector d_sqrt = phi_eig.eigenvalues.array().sqrt();
  const Matrix phi_sqrt = v * d_sqrt.asDiagonal() * v.transpose();
  const Matrix phi_isqrt = v * d_sqrt.cwiseInverse().asDiagonal() * v.transpose();

  const SymmetricMatrix s = SymmetricMatrix::symmetrized(phi_sqrt * p.psi().mat() * phi_sqrt);
  const SymEigen s_eig = sym_eigen(s);
  const Vector y_eigs =
      (s_eig.eigenvalues.array() + alpha * alpha).sqrt() + alpha;
  const Matrix y = s_eig.eigenvectors * y_eigs.asDiagonal() * s_eig.eigenvectors.transpose();
  const Matrix mode = phi_isqrt * y * phi_isqrt;
  return SpdMatrix::cholesky(SymmetricMatrix::symmetrized(mode));
}

/// Same mode through the general Hamiltonian/Schur solver; serves as the
/// independent cross-check of the closed form.
inline SpdMatrix mgig_mode_schur(const MgigParams& p) {
  const int n = p.dim();
  AreProblem are{-p.alpha() * Matrix::Identity(n, n), p.phi().sym(),
                 SymmetricMatrix::symmetrized(-p.psi().mat())};
  return solve_are_schur(are);
}

/// Certificate that the distribution has a single interior mode: the block
/// matrix [[-alpha I, Phi], [Psi, alpha I]] must have no eigenvalues on the
/// imaginary axis. Its eigenvalues are +-sqrt(l_i + alpha^2) with l_i > 0 the
/// eigenvalues of Phi Psi, so a true `has_imaginary` flags numerical failure.
inline UnimodalityCertificate mgig_unimodality_certificate(const MgigParams& p,
                                                           double tol = -1.0) {
  const int n = p.dim();
  HamiltonianMatrix h(-p.alpha() * Matrix::Identity(n, n), p.phi().sym(),
                      SymmetricMatrix::symmetrized(-p.psi().mat()));
  if (tol < 0.0) tol = 1e-9 * std::max(1.0, h.assemble().norm());
  return hamiltonian_eigen_check(h, tol);
}

inline double default_mode_matched_wishart_dof(int n) { return n + 3.0; }
inline double default_mode_matched_iw_dof(int n) { return n + 2.0; }

/// Wishart proposal whose mode equals the target's mode:
/// scale = L* / (rho - N - 1).
inline ProposalDistribution build_mode_matched_wishart(const MgigParams& p, double rho) {
  const int n = p.dim();
  if (!(rho > n + 1)) {
    throw InvalidDof("build_mode_matched_wishart: rho must exceed N + 1, got " +
                     std::to_string(rho));
  }
  const SpdMatrix mode = mgig_mode(p);
  return ProposalDistribution::wishart(WishartParams(
      SpdMatrix::cholesky(SymmetricMatrix::symmetrized(mode.mat() / (rho - n - 1))), rho));
}

/// Inverse-Wishart proposal with the same mode: scale = (rho + N + 1) L*.
inline ProposalDistribution build_mode_matched_iw(const MgigParams& p, double rho) {
  const int n = p.dim();
  if (!(rho > n - 1)) {
    throw InvalidDof("build_mode_matched_iw: rho must exceed N - 1, got " +
                     std::to_string(rho));
  }
  const SpdMatrix mode = mgig_mode(p);
  return ProposalDistribution::inverse_wishart(InverseWishartParams(
      SpdMatrix::cholesky(SymmetricMatrix::symmetrized((rho + n + 1) * mode.mat())), rho));
}

enum class BaselineKind { wishart_factor, iw_factor };

/// Factorization-based proposals: the Inverse-Wishart or Wishart factor of
/// the target density itself. Either factor exists only when its dof
/// condition holds; otherwise this baseline simply does not exist.
inline ProposalDistribution build_baseline_proposal(const MgigParams& p, BaselineKind kind) {
  const int n = p.dim();
  if (kind == BaselineKind::iw_factor) {
    if (!(-2.0 * p.nu() > n - 1)) {
      throw InvalidDof("build_baseline_proposal: iw factor needs -2 nu > N - 1");
    }
    return ProposalDistribution::inverse_wishart(InverseWishartParams(p.psi(), -2.0 * p.nu()));
  }
  if (!(2.0 * p.nu() > n - 1)) {
    throw InvalidDof("build_baseline_proposal: wishart factor needs 2 nu > N - 1");
  }
  return ProposalDistribution::wishart(WishartParams(
      SpdMatrix::cholesky(SymmetricMatrix::symmetrized(p.phi().inverse())), 2.0 * p.nu()));
}

}  // namespace mgig
