#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "mgig/distribution.hpp"
#include "test_helpers.hpp"

using namespace mgig;

namespace {

SpdMatrix scalar_spd(double v) {
  return cholesky(SymmetricMatrix(v * Matrix::Ones(1, 1)));
}

SpdDraw scalar_draw(double v) { return spd_draw_of(scalar_spd(v)); }

MgigParams random_params(int n, std::mt19937_64& gen, double nu_lo = -15.0,
                         double nu_hi = 15.0) {
  std::uniform_real_distribution<double> nu_dist(nu_lo, nu_hi);
  return MgigParams(test::random_spd(n, gen), test::random_spd(n, gen), nu_dist(gen));
}

}  // namespace

TEST_CASE("log density by direct substitution") {
  MgigParams p(scalar_spd(35.0), scalar_spd(10.0), 10.0);
  CHECK(p.alpha() == Catch::Approx(9.0));
  // 9 * log(1) - 35/2 - 10/2
  CHECK(mgig_log_density_unnorm(scalar_draw(1.0), p) == Catch::Approx(-22.5));
}

TEST_CASE("log density peaks at the mode against scaled copies") {
  std::mt19937_64 gen(101);
  MgigParams p = random_params(3, gen);
  const Matrix mode = mgig_mode(p).mat();
  const auto at = [&](double c) {
    return mgig_log_density_unnorm(
        spd_draw_of(cholesky(SymmetricMatrix::symmetrized(c * mode))), p);
  };
  CHECK(at(1.0) > at(0.5));
  CHECK(at(1.0) > at(2.0));
}

TEST_CASE("alpha = 0 scalar kernel is symmetric under inversion") {
  MgigParams p(scalar_spd(1.0), scalar_spd(1.0), 1.0);
  CHECK(p.alpha() == 0.0);
  CHECK(mgig_log_density_unnorm(scalar_draw(2.0), p) ==
        Catch::Approx(mgig_log_density_unnorm(scalar_draw(0.5), p)));
}

TEST_CASE("parameter inversion is an involution with the stated jacobian") {
  std::mt19937_64 gen(103);
  MgigParams p = random_params(3, gen);
  MgigParams q = mgig_invert_params(p);
  CHECK(q.nu() == -p.nu());
  CHECK(q.psi().mat() == p.phi().mat());
  CHECK(q.phi().mat() == p.psi().mat());

  MgigParams back = mgig_invert_params(q);
  CHECK(back.nu() == p.nu());
  CHECK(back.psi().mat() == p.psi().mat());

  // log f_p(L) - log f_q(L^{-1}) + (N+1) log|L| must not depend on L
  const auto probe = [&](const SpdMatrix& lam) {
    SpdDraw d = spd_draw_of(lam);
    SpdDraw dinv = spd_draw_of(cholesky(SymmetricMatrix::symmetrized(d.inv_lambda.mat())));
    return mgig_log_density_unnorm(d, p) - mgig_log_density_unnorm(dinv, q) +
           (p.dim() + 1) * d.log_det;
  };
  const double c1 = probe(test::random_spd(3, gen));
  const double c2 = probe(test::random_spd(3, gen));
  CHECK(c1 == Catch::Approx(c2).margin(1e-9));
}

TEST_CASE("scalar mode solves the quadratic") {
  MgigParams p(scalar_spd(35.0), scalar_spd(10.0), 10.0);
  const double expected = (9.0 + std::sqrt(431.0)) / 10.0;
  CHECK(mgig_mode(p).mat()(0, 0) == Catch::Approx(expected).epsilon(1e-12));
  CHECK(mgig_mode_schur(p).mat()(0, 0) == Catch::Approx(expected).epsilon(1e-10));
}

TEST_CASE("identity parameters give a scaled identity mode") {
  for (double nu : {-4.0, 0.5, 3.0}) {
    MgigParams p(cholesky(SymmetricMatrix::identity(3)),
                 cholesky(SymmetricMatrix::identity(3)), nu);
    const double a = p.alpha();
    const double expected = a + std::sqrt(a * a + 1.0);
    CHECK(rel_error(mgig_mode(p).mat(), expected * Matrix::Identity(3, 3)) < 1e-12);
  }
}

TEST_CASE("alpha = 0 with identity phi gives the square root of psi") {
  std::mt19937_64 gen(107);
  SpdMatrix psi = test::random_spd(4, gen);
  MgigParams p(psi, cholesky(SymmetricMatrix::identity(4)), (4 + 1) / 2.0);
  CHECK(p.alpha() == 0.0);
  CHECK(rel_error(mgig_mode(p).mat(), spd_sqrt(psi).mat()) < 1e-10);
}

TEST_CASE("mode properties over random parameters") {
  std::mt19937_64 gen(109);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(gen() % 10);
    MgigParams p = random_params(n, gen);
    SpdMatrix mode = mgig_mode(p);
    CHECK(mgig_mode_residual(mode.mat(), p) < 1e-10);
    CHECK(sym_eigen(mode.sym()).eigenvalues.minCoeff() > 0.0);
    SpdMatrix schur_mode = mgig_mode_schur(p);
    CHECK(rel_error(schur_mode.mat(), mode.mat()) < 1e-8);
  }
}

TEST_CASE("numerical gradient vanishes at the mode") {
  std::mt19937_64 gen(113);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 1 + static_cast<int>(gen() % 4);
    MgigParams p = random_params(n, gen, -6.0, 6.0);
    const Matrix mode = mgig_mode(p).mat();
    const auto kernel = [&](const Matrix& m) {
      return mgig_log_density_unnorm(spd_draw_of(cholesky(SymmetricMatrix::symmetrized(m))),
                                     p);
    };
    const Matrix grad = test::numerical_sym_gradient(kernel, mode);
    const Matrix mode_inv = cholesky(SymmetricMatrix::symmetrized(mode)).inverse();
    const double scale = std::abs(p.alpha()) * mode_inv.norm() +
                         (mode_inv * p.psi().mat() * mode_inv).norm() + p.phi().mat().norm();
    CHECK(grad.norm() < 1e-4 * scale);
  }
}

TEST_CASE("unimodality certificate on the scalar example") {
  MgigParams p(scalar_spd(35.0), scalar_spd(10.0), 10.0);
  UnimodalityCertificate cert = mgig_unimodality_certificate(p);
  CHECK_FALSE(cert.has_imaginary);
  REQUIRE(cert.eigenvalues.size() == 2);
  CHECK(cert.eigenvalues[0].real() == Catch::Approx(-std::sqrt(431.0)));
  CHECK(cert.eigenvalues[1].real() == Catch::Approx(std::sqrt(431.0)));
}

TEST_CASE("certificate eigenvalues pair to zero trace") {
  std::mt19937_64 gen(127);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + static_cast<int>(gen() % 6);
    MgigParams p = random_params(n, gen);
    UnimodalityCertificate cert = mgig_unimodality_certificate(p);
    CHECK_FALSE(cert.has_imaginary);
    std::complex<double> sum = cert.eigenvalues.sum();
    CHECK(std::abs(sum) < 1e-8 * (1.0 + cert.eigenvalues.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("mode-matched wishart proposal") {
  MgigParams p(cholesky(SymmetricMatrix::identity(2)),
               cholesky(SymmetricMatrix::identity(2)), (2 + 1) / 2.0);  // mode = I
  ProposalDistribution q = build_mode_matched_wishart(p, 5.0);
  CHECK(q.kind() == ProposalDistribution::Kind::wishart);
  CHECK(rel_error(q.wishart_params().scale.mat(), 0.5 * Matrix::Identity(2, 2)) < 1e-12);
  CHECK(rel_error(q.mode().mat(), mgig_mode(p).mat()) < 1e-10);

  CHECK_THROWS_AS(build_mode_matched_wishart(p, 3.0), InvalidDof);  // rho = N + 1
}

TEST_CASE("mode-matched inverse-wishart proposal") {
  MgigParams p(cholesky(SymmetricMatrix::identity(2)),
               cholesky(SymmetricMatrix::identity(2)), (2 + 1) / 2.0);  // mode = I
  ProposalDistribution q = build_mode_matched_iw(p, 20.0);
  CHECK(rel_error(q.inverse_wishart_params().scale.mat(), 23.0 * Matrix::Identity(2, 2)) <
        1e-12);
  CHECK(rel_error(q.mode().mat(), mgig_mode(p).mat()) < 1e-10);

  // scalar case: rho = 3, mode 2 -> scale (3 + 1 + 1) * 2 = 10
  MgigParams ps(scalar_spd(35.0), scalar_spd(10.0), 10.0);
  const double mode = mgig_mode(ps).mat()(0, 0);
  ProposalDistribution qs = build_mode_matched_iw(ps, 3.0);
  CHECK(qs.inverse_wishart_params().scale.mat()(0, 0) == Catch::Approx(5.0 * mode));
}

TEST_CASE("baseline proposals follow the density factors") {
  MgigParams p(scalar_spd(35.0), scalar_spd(10.0), 10.0);
  ProposalDistribution w = build_baseline_proposal(p, BaselineKind::wishart_factor);
  CHECK(w.kind() == ProposalDistribution::Kind::wishart);
  CHECK(w.wishart_params().scale.mat()(0, 0) == Catch::Approx(0.1));
  CHECK(w.wishart_params().dof == Catch::Approx(20.0));

  std::mt19937_64 gen(131);
  MgigParams p2(test::random_spd(2, gen), test::random_spd(2, gen), -10.0);
  ProposalDistribution iw = build_baseline_proposal(p2, BaselineKind::iw_factor);
  CHECK(iw.kind() == ProposalDistribution::Kind::inverse_wishart);
  CHECK(iw.inverse_wishart_params().dof == Catch::Approx(20.0));
  CHECK(iw.inverse_wishart_params().scale.mat() == p2.psi().mat());

  MgigParams p3(test::random_spd(2, gen), test::random_spd(2, gen), 0.1);
  CHECK_THROWS_AS(build_baseline_proposal(p3, BaselineKind::wishart_factor), InvalidDof);
  CHECK_THROWS_AS(build_baseline_proposal(p3, BaselineKind::iw_factor), InvalidDof);
}

TEST_CASE("vanishing phi approaches the inverse-wishart factor") {
  std::mt19937_64 gen(137);
  const int n = 3;
  SpdMatrix psi = test::random_spd(n, gen);
  const double nu = -4.0;  // -nu > (N-1)/2
  MgigParams p(psi, cholesky(SymmetricMatrix::symmetrized(1e-8 * Matrix::Identity(n, n))),
               nu);
  InverseWishartParams iw(psi, -2.0 * nu);
  double reference = 0.0;
  for (int i = 0; i < 10; ++i) {
    SpdDraw d = spd_draw_of(test::random_spd(n, gen));
    const double diff = mgig_log_density_unnorm(d, p) - inverse_wishart_log_density_unnorm(d, iw);
    if (i == 0) reference = diff;
    CHECK(diff == Catch::Approx(reference).margin(1e-4));
  }
}

TEST_CASE("vanishing psi approaches the wishart factor") {
  std::mt19937_64 gen(139);
  const int n = 3;
  SpdMatrix phi = test::random_spd(n, gen);
  const double nu = 4.0;  // nu > (N-1)/2
  MgigParams p(cholesky(SymmetricMatrix::symmetrized(1e-8 * Matrix::Identity(n, n))), phi,
               nu);
  WishartParams w(cholesky(SymmetricMatrix::symmetrized(phi.inverse())), 2.0 * nu);
  double reference = 0.0;
  for (int i = 0; i < 10; ++i) {
    SpdDraw d = spd_draw_of(test::random_spd(n, gen));
    const double diff = mgig_log_density_unnorm(d, p) - wishart_log_density_unnorm(d, w);
    if (i == 0) reference = diff;
    CHECK(diff == Catch::Approx(reference).margin(1e-4));
  }
}

TEST_CASE("dimension mismatch is rejected") {
  std::mt19937_64 gen(149);
  CHECK_THROWS_AS(MgigParams(test::random_spd(2, gen), test::random_spd(3, gen), 1.0),
                  DimensionMismatch);
  MgigParams p(test::random_spd(2, gen), test::random_spd(2, gen), 1.0);
  CHECK_THROWS_AS(mgig_log_density_unnorm(spd_draw_of(test::random_spd(3, gen)), p),
                  DimensionMismatch);
}
