#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>

#include "mgig/errors.hpp"
#include "mgig/linalg.hpp"
#include "mgig/rng.hpp"

namespace mgig {

struct WishartParams {
  SpdMatrix scale;  // Sigma
  double dof;       // rho > N - 1

  WishartParams(SpdMatrix scale_in, double dof_in)
      : scale(std::move(scale_in)), dof(dof_in) {
    if (!(dof > scale.dim() - 1)) {
      throw InvalidDof("WishartParams: dof must exceed N - 1, got " + std::to_string(dof));
    }
  }

  int dim() const { return scale.dim(); }
};

struct InverseWishartParams {
  SpdMatrix scale;  // Psi
  double dof;       // alpha > N - 1

  InverseWishartParams(SpdMatrix scale_in, double dof_in)
      : scale(std::move(scale_in)), dof(dof_in) {
    if (!(dof > scale.dim() - 1)) {
      throw InvalidDof("InverseWishartParams: dof must exceed N - 1, got " +
                       std::to_string(dof));
    }
  }

  int dim() const { return scale.dim(); }

  /// The draw of this distribution is the inverse of a Wishart draw with the
  /// inverted scale and the same dof.
  WishartParams wishart_base() const {
    return WishartParams(
        SpdMatrix::cholesky(SymmetricMatrix::symmetrized(scale.inverse())), dof);
  }
};

/// A drawn SPD matrix with its inverse and log-determinant, all derived from
/// one triangular factor.
struct SpdDraw {
  SpdMatrix lambda;
  SpdMatrix inv_lambda;
  double log_det;  // of lambda

  int dim() const { return lambda.dim(); }
};

/// Wraps a known SPD matrix as a draw, deriving inverse and log-determinant
/// from its factor. For evaluating densities at chosen points.
inline SpdDraw spd_draw_of(const SpdMatrix& m) {
  SpdMatrix inv = SpdMatrix::trusted(SymmetricMatrix::symmetrized(m.inverse()));
  return SpdDraw{m, std::move(inv), m.log_det()};
}

/// Upper-triangular random factor: diagonal sqrt(chi^2(dof - i)) for row i
/// (0-based), N(0,1) above the diagonal. Draw order is row-major.
inline Matrix bartlett_factor(int n, double dof, SeededRng& rng) {
  Matrix p = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    p(i, i) = std::sqrt(rng.chi_squared(dof - i));
    for (int j = i + 1; j < n; ++j) p(i, j) = rng.normal();
  }
  return p;
}

/// Deterministic core of the Wishart sampler: given the random factor P,
/// forms R = P L with L^T L = Sigma, and returns Lambda = R^T R together with
/// its inverse (triangular solves) and |Lambda| = (prod R_ii)^2.
inline SpdDraw wishart_sample_from_bartlett(const WishartParams& p, const Matrix& bartlett) {
  const int n = p.dim();
  const Matrix r = (bartlett * p.scale.chol_upper()).triangularView<Eigen::Upper>();
  SpdMatrix lambda = SpdMatrix::from_factor_upper(r);
  const double log_det = lambda.log_det();
  const Matrix rinv = r.triangularView<Eigen::Upper>().solve(Matrix::Identity(n, n));
  SpdMatrix inv = SpdMatrix::trusted(SymmetricMatrix::symmetrized(rinv * rinv.transpose()));
  return SpdDraw{std::move(lambda), std::move(inv), log_det};
}

inline SpdDraw wishart_sample(const WishartParams& p, SeededRng& rng) {
  return wishart_sample_from_bartlett(p, bartlett_factor(p.dim(), p.dof, rng));
}

/// Inverse-Wishart draw: invert a Wishart draw of the inverted scale. The
/// Wishart draw itself becomes inv_lambda, so both directions stay cheap.
inline SpdDraw inverse_wishart_sample_from_bartlett(const InverseWishartParams& p,
                                                    const WishartParams& base,
                                                    const Matrix& bartlett) {
  const int n = p.dim();
  const Matrix rw = (bartlett * base.scale.chol_upper()).triangularView<Eigen::Upper>();
  SpdMatrix inv = SpdMatrix::from_factor_upper(rw);
  const double log_det = -inv.log_det();
  const Matrix rwinv = rw.triangularView<Eigen::Upper>().solve(Matrix::Identity(n, n));
  SpdMatrix lambda =
      SpdMatrix::trusted(SymmetricMatrix::symmetrized(rwinv * rwinv.transpose()));
  return SpdDraw{std::move(lambda), std::move(inv), log_det};
}

inline SpdDraw inverse_wishart_sample(const InverseWishartParams& p, SeededRng& rng) {
  const WishartParams base = p.wishart_base();
  return inverse_wishart_sample_from_bartlett(p, base,
                                              bartlett_factor(p.dim(), p.dof, rng));
}

/// ((rho - N - 1)/2) log|L| - Tr(Sigma^{-1} L)/2, up to the normalizer.
inline double wishart_log_density_unnorm(const SpdDraw& lam, const WishartParams& p) {
  if (lam.dim() != p.dim()) {
    throw DimensionMismatch("wishart_log_density_unnorm: dimension mismatch");
  }
  const double trace = p.scale.solve(lam.lambda.mat()).trace();
  return 0.5 * (p.dof - p.dim() - 1) * lam.log_det - 0.5 * trace;
}

/// -((alpha + N + 1)/2) log|L| - Tr(Psi L^{-1})/2, up to the normalizer.
inline double inverse_wishart_log_density_unnorm(const SpdDraw& lam,
                                                 const InverseWishartParams& p) {
  if (lam.dim() != p.dim()) {
    throw DimensionMismatch("inverse_wishart_log_density_unnorm: dimension mismatch");
  }
  const double trace = (p.scale.mat().array() * lam.inv_lambda.mat().array()).sum();
  return -0.5 * (p.dof + p.dim() + 1) * lam.log_det - 0.5 * trace;
}

inline SpdMatrix wishart_mode(const WishartParams& p) {
  if (!(p.dof > p.dim() + 1)) {
    throw ModeNotInterior("wishart_mode: requires dof > N + 1, got " + std::to_string(p.dof));
  }
  return SpdMatrix::cholesky(
      SymmetricMatrix::symmetrized((p.dof - p.dim() - 1) * p.scale.mat()));
}

inline SpdMatrix inverse_wishart_mode(const InverseWishartParams& p) {
  return SpdMatrix::cholesky(
      SymmetricMatrix::symmetrized(p.scale.mat() / (p.dof + p.dim() + 1)));
}

/// A Wishart or Inverse-Wishart proposal over SPD matrices: sampling plus
/// unnormalized log-density, with the per-draw constants precomputed.
class ProposalDistribution {
 public:
  enum class Kind { wishart, inverse_wishart };

  static ProposalDistribution wishart(WishartParams p) {
    ProposalDistribution q;
    q.kind_ = Kind::wishart;
    q.inv_scale_ = p.scale.inverse();
    q.w_.emplace(std::move(p));
    return q;
  }

  static ProposalDistribution inverse_wishart(InverseWishartParams p) {
    ProposalDistribution q;
    q.kind_ = Kind::inverse_wishart;
    q.base_.emplace(p.wishart_base());
    q.iw_.emplace(std::move(p));
    return q;
  }

  Kind kind() const { return kind_; }
  int dim() const { return kind_ == Kind::wishart ? w_->dim() : iw_->dim(); }
  double dof() const { return kind_ == Kind::wishart ? w_->dof : iw_->dof; }

  const WishartParams& wishart_params() const {
    if (kind_ != Kind::wishart) throw ValidationError("proposal is not Wishart");
    return *w_;
  }
  const InverseWishartParams& inverse_wishart_params() const {
    if (kind_ != Kind::inverse_wishart) throw ValidationError("proposal is not Inverse-Wishart");
    return *iw_;
  }

  SpdDraw sample(SeededRng& rng) const {
    if (kind_ == Kind::wishart) return wishart_sample(*w_, rng);
    return inverse_wishart_sample_from_bartlett(*iw_, *base_,
                                                bartlett_factor(iw_->dim(), iw_->dof, rng));
  }

  double log_density_unnorm(const SpdDraw& lam) const {
    if (lam.dim() != dim()) {
      throw DimensionMismatch("ProposalDistribution: draw dimension mismatch");
    }
    if (kind_ == Kind::wishart) {
      const double trace = (inv_scale_.array() * lam.lambda.mat().array()).sum();
      return 0.5 * (w_->dof - w_->dim() - 1) * lam.log_det - 0.5 * trace;
    }
    return inverse_wishart_log_density_unnorm(lam, *iw_);
  }

  SpdMatrix mode() const {
    if (kind_ == Kind::wishart) return wishart_mode(*w_);
    return inverse_wishart_mode(*iw_);
  }

  std::string kind_name() const {
    return kind_ == Kind::wishart ? "wishart" : "inverse_wishart";
  }

 private:
  ProposalDistribution() = default;

  Kind kind_ = Kind::wishart;
  std::optional<WishartParams> w_;
  std::optional<InverseWishartParams> iw_;
  std::optional<WishartParams> base_;  // sampler base for the inverse kind
  Matrix inv_scale_;                   // Sigma^{-1} for the Wishart density
};

}  // namespace mgig
