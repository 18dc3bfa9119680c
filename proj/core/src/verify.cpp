#include "peeropt/verify.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "peeropt/polykit.hpp"

namespace peeropt {

namespace {

double spectral_radius(const Mat4& M) {
  Eigen::EigenSolver<Mat4> es(M, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double spectral_radius(const CMat4& M) {
  Eigen::ComplexEigenSolver<CMat4> es(M, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

std::vector<double> logspace(double e0, double e1, int n) {
  std::vector<double> v(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    v[static_cast<size_t>(i)] = std::pow(10.0, e0 + (e1 - e0) * i / (n - 1));
  return v;
}

Mat4 flip_matrix() {
  Mat4 Pi = Mat4::Zero();
  for (int i = 0; i < 4; ++i) Pi(i, 3 - i) = 1.0;
  return Pi;
}

// Uniform double in [lo, hi) from raw 32-bit draws; avoids the
// implementation-defined std::uniform_real_distribution.
double draw_uniform(std::mt19937& gen, double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(gen()) / 4294967296.0);
}

const Mat4& boundary_matrix(const PeerTriplet& t, Boundary b) {
  return b == Boundary::start ? t.A0 : t.AN;
}

const Mat4& surrogate_matrix(const PeerTriplet& t, Boundary b) {
  return b == Boundary::start ? t.At0 : t.AtN;
}

}  // namespace

double OrderResiduals::max() const {
  return std::max({forward, adjoint, start, end, rank1_start, rank1_end});
}

OrderResiduals order_residuals(const PeerTriplet& t, double sigma) {
  const Mat43 Vq = vandermonde<3>(t.c);
  const Mat3 Pinv = pascal_inverse<3>();
  const Mat3 P = pascal<3>();
  const Mat3 E = scaled_shift<3>();
  const Mat3 S = sigma_scaling<3>(sigma);
  const Mat3 Sinv = sigma_scaling<3>(1.0 / sigma);
  const Mat4 B = assemble_B(t, sigma);
  const Mat4 K = t.kdiag.asDiagonal();

  OrderResiduals r;
  r.forward = (t.A * Vq - K * Vq * E - B * Vq * Pinv * Sinv)
                  .cwiseAbs()
                  .maxCoeff();
  r.adjoint = (t.A.transpose() * Vq + K * Vq * E - B.transpose() * Vq * S * P)
                  .cwiseAbs()
                  .maxCoeff();
  r.start = (t.A0 * Vq - t.a * Eigen::RowVector3d::Unit(0) - K * Vq * E)
                .cwiseAbs()
                .maxCoeff();
  r.end = (t.AN.transpose() * Vq + K * Vq * E - t.w * Eigen::RowVector3d::Ones())
              .cwiseAbs()
              .maxCoeff();
  // Rank-one structure in the order-4 polynomial basis: only the last row
  // (column) of the transformed difference may be nonzero.
  const Mat4 M0 = t.V.transpose() * (t.A0 - t.A);
  r.rank1_start = M0.topRows(3).cwiseAbs().maxCoeff();
  const Mat4 MN = (t.AN - t.A) * t.V;
  r.rank1_end = MN.leftCols(3).cwiseAbs().maxCoeff();
  return r;
}

StructureReport verify_structure(const PeerTriplet& t) {
  StructureReport rep;
  const Mat43 V3 = vandermonde<3>(t.c);
  const Mat3 P3inv = pascal_inverse<3>();

  for (double sigma : {0.7, 1.0, 1.6}) {
    Mat3 Q33 = V3.transpose() * assemble_B(t, sigma) * V3 * P3inv;
    Q33(0, 0) -= 1.0;
    rep.q33_residual = std::max(rep.q33_residual, Q33.cwiseAbs().maxCoeff());
  }

  Eigen::RowVector4d colsum = t.A.colwise().sum();
  colsum(3) -= 1.0;
  rep.lsrk_residual =
      std::max(colsum.cwiseAbs().maxCoeff(), std::abs(t.c(3) - 1.0));

  Vec4 e1 = Vec4::Unit(0);
  rep.adjoint_lsrk_residual =
      (t.V.transpose() * t.A * Vec4::Ones() - e1).cwiseAbs().maxCoeff();
  rep.adjoint_lsrk = rep.adjoint_lsrk_residual <= 1e-10;

  {
    Eigen::JacobiSVD<Mat4> svd0(t.A0 - t.A);
    rep.rank1_ratio_start =
        svd0.singularValues()(1) / svd0.singularValues()(0);
    Eigen::JacobiSVD<Mat4> svdN(t.AN - t.A);
    rep.rank1_ratio_end = svdN.singularValues()(1) / svdN.singularValues()(0);
  }

  // Correction-vector conditions in the polynomial basis at sigma = 1.
  {
    const Mat4 B1 = assemble_B(t, 1.0);
    const Eigen::RowVector4d phi0 = (t.V.transpose() * (t.A0 - t.A)).row(3);
    const Eigen::RowVector3d lhs0 = phi0 * V3;
    const Eigen::Matrix<double, 4, 3> Q43 =
        t.V.transpose() * B1 * V3 * P3inv;
    rep.phi_start_residual = std::max(std::abs(lhs0(1) + Q43(3, 1)),
                                      std::abs(lhs0(2) + Q43(3, 2)));
    const Vec4 phiN = ((t.AN - t.A) * t.V).col(3);
    const Eigen::RowVector3d lhs = phiN.transpose() * V3 * P3inv;
    const Mat4 bh1 = t.bhat(1.0);
    rep.phi_end_residual = std::max(std::abs(lhs(1) + bh1(1, 3)),
                                    std::abs(lhs(2) + bh1(2, 3)));
  }

  {
    double tri = 0;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < i; ++j)
        tri = std::max({tri, std::abs(t.A0(i, j) - t.At0(i, j)),
                        std::abs(t.AN(i, j) - t.AtN(i, j))});
    rep.triangular_residual = tri;
  }

  const Mat4 Pi = flip_matrix();
  const Vec4 kflip = Pi * t.kdiag;
  rep.flip_residual = std::max(
      {(Pi * t.A * Pi - t.A.transpose()).cwiseAbs().maxCoeff(),
       (Pi * t.AN * Pi - t.A0.transpose()).cwiseAbs().maxCoeff(),
       (kflip - t.kdiag).cwiseAbs().maxCoeff(),
       (t.w - Pi * t.a).cwiseAbs().maxCoeff()});
  rep.has_flip = rep.flip_residual <= 1e-12;
  rep.bflip_residual =
      (Pi * assemble_B(t, 2.0) * Pi - assemble_B(t, 0.5).transpose())
          .cwiseAbs()
          .maxCoeff();

  if (t.exact) {
    const ExactTables& ex = *t.exact;
    bool ok = equal(flip_both(ex.A), transpose(ex.A)) &&
              equal(flip_both(ex.AN), transpose(ex.A0));
    for (int i = 0; i < 4 && ok; ++i) {
      ok = ok && ex.kdiag[static_cast<size_t>(i)] ==
                     ex.kdiag[static_cast<size_t>(3 - i)];
      ok = ok && ex.w[static_cast<size_t>(i)] ==
                     ex.a[static_cast<size_t>(3 - i)];
    }
    rep.flip_exact = ok;
  }
  return rep;
}

Vec4 beta3(const PeerTriplet& t, double sigma) {
  const Mat4 B = assemble_B(t, sigma);
  const Vec4 c2 = cwise_pow(t.c, 2);
  const Vec4 rhs = t.A * cwise_pow(t.c, 3) -
                   B * cwise_pow(t.c - Vec4::Ones(), 3) / std::pow(sigma, 3) -
                   3.0 * (t.kdiag.asDiagonal() * c2);
  return t.A.partialPivLu().solve(rhs) / 6.0;
}

Vec4 beta3_adjoint(const PeerTriplet& t, double sigma) {
  const Mat4 B = assemble_B(t, sigma);
  const Vec4 c2 = cwise_pow(t.c, 2);
  const Vec4 rhs = t.A.transpose() * cwise_pow(t.c, 3) -
                   B.transpose() * cwise_pow(Vec4::Ones() + sigma * t.c, 3) +
                   3.0 * (t.kdiag.asDiagonal() * c2);
  return Mat4(t.A.transpose()).partialPivLu().solve(rhs) / 6.0;
}

Vec4 beta3_start(const PeerTriplet& t) {
  const Vec4 c2 = cwise_pow(t.c, 2);
  return (cwise_pow(t.c, 3) -
          3.0 * t.A0.partialPivLu().solve(Vec4(t.kdiag.asDiagonal() * c2))) /
         6.0;
}

Vec4 beta3_start_adjoint(const PeerTriplet& t) {
  const Mat4 B = assemble_B(t, 1.0);
  const Vec4 c2 = cwise_pow(t.c, 2);
  const Vec4 rhs = t.A0.transpose() * cwise_pow(t.c, 3) -
                   B.transpose() * cwise_pow(Vec4::Ones() + t.c, 3) +
                   3.0 * (t.kdiag.asDiagonal() * c2);
  return Mat4(t.A0.transpose()).partialPivLu().solve(rhs) / 6.0;
}

Vec4 beta3_end(const PeerTriplet& t) {
  const Mat4 B = assemble_B(t, 1.0);
  const Vec4 c2 = cwise_pow(t.c, 2);
  const Vec4 rhs = t.AN * cwise_pow(t.c, 3) -
                   B * cwise_pow(t.c - Vec4::Ones(), 3) -
                   3.0 * (t.kdiag.asDiagonal() * c2);
  return t.AN.partialPivLu().solve(rhs) / 6.0;
}

Vec4 beta3_end_adjoint(const PeerTriplet& t) {
  const Vec4 c2 = cwise_pow(t.c, 2);
  return (cwise_pow(t.c, 3) +
          3.0 * Mat4(t.AN.transpose())
                    .partialPivLu()
                    .solve(Vec4(t.kdiag.asDiagonal() * c2)) -
          Vec4::Ones()) /
         6.0;
}

ErrorConstants error_constants(const PeerTriplet& t) {
  ErrorConstants e;
  e.interior_fwd = beta3(t, 1.0).cwiseAbs().maxCoeff();
  e.interior_adj = beta3_adjoint(t, 1.0).cwiseAbs().maxCoeff();
  e.start_fwd = beta3_start(t).cwiseAbs().maxCoeff();
  e.start_adj = beta3_start_adjoint(t).cwiseAbs().maxCoeff();
  e.end_fwd = beta3_end(t).cwiseAbs().maxCoeff();
  e.end_adj = beta3_end_adjoint(t).cwiseAbs().maxCoeff();
  return e;
}

std::array<double, 2> superconvergence_residual(const PeerTriplet& t,
                                                double sigma) {
  const double s1 = Vec4::Ones().dot(t.A * beta3(t, sigma));
  const double s2 = Vec4::Ones().dot(t.A.transpose() * beta3_adjoint(t, sigma));
  return {s1, s2};
}

ZeroStabilityResult zero_stability_norm(const PeerTriplet& t, double sigma) {
  ZeroStabilityResult res;
  const Mat4 Bbar = t.A.partialPivLu().solve(assemble_B(t, sigma));
  if (t.W) {
    const Mat4 M = t.W->partialPivLu().solve(Bbar * (*t.W));
    res.value = M.cwiseAbs().rowwise().sum().maxCoeff();
    res.weighted_norm = true;
  } else {
    res.value = spectral_radius(Bbar);
    res.weighted_norm = false;
  }
  return res;
}

double product_bound(const PeerTriplet& t, unsigned seed, int n_sequences,
                     int k_max) {
  std::mt19937 gen(seed);
  const Eigen::PartialPivLU<Mat4> lu(t.A);
  double worst = 0;
  for (int s = 0; s < n_sequences; ++s) {
    Mat4 M = Mat4::Identity();
    for (int k = 0; k < k_max; ++k) {
      const double sigma = draw_uniform(gen, t.sigma_min, t.sigma_max);
      M = lu.solve(assemble_B(t, sigma)) * M;
      worst = std::max(worst, M.cwiseAbs().rowwise().sum().maxCoeff());
    }
  }
  return worst;
}

double stability_scan(const PeerTriplet& t, double angle_deg, int n_radii,
                      int n_angles) {
  const double alpha = angle_deg * M_PI / 180.0;
  const Mat4 B1 = assemble_B(t, 1.0);
  const CMat4 Bc = B1.cast<Complex>();
  const Mat4 K = t.kdiag.asDiagonal();
  double worst = 0;
  for (double r : logspace(-4, 6, n_radii)) {
    for (int j = 0; j < n_angles; ++j) {
      const double th =
          M_PI - alpha + 2.0 * alpha * j / std::max(1, n_angles - 1);
      const Complex z = r * std::exp(Complex(0, th));
      const CMat4 M = (t.A.cast<Complex>() - z * K.cast<Complex>())
                          .partialPivLu()
                          .solve(Bc);
      worst = std::max(worst, spectral_radius(M));
    }
  }
  return worst;
}

double imaginary_axis_scan(const PeerTriplet& t, double xi_max, int n) {
  const CMat4 Bc = assemble_B(t, 1.0).cast<Complex>();
  const Mat4 K = t.kdiag.asDiagonal();
  double worst = 0;
  for (int j = 0; j < n; ++j) {
    const double xi = -xi_max + 2.0 * xi_max * j / (n - 1);
    const CMat4 M = (t.A.cast<Complex>() - Complex(0, xi) * K.cast<Complex>())
                        .partialPivLu()
                        .solve(Bc);
    worst = std::max(worst, spectral_radius(M));
  }
  return worst;
}

ContractionFactors contraction_factors(const PeerTriplet& t, Boundary b,
                                       double angle_deg, int n_radii,
                                       int n_angles) {
  const Mat4& Ab = boundary_matrix(t, b);
  const Mat4& At = surrogate_matrix(t, b);
  const Mat4 K = t.kdiag.asDiagonal();
  const double alpha = angle_deg * M_PI / 180.0;
  const std::vector<double> radii = logspace(-6, 8, n_radii);

  ContractionFactors out;
  const Mat4 D = At - Ab;
  for (double r : radii) {
    const Mat4 M = (At + r * K).partialPivLu().solve(D);
    out.rho_real = std::max(out.rho_real, spectral_radius(M));
  }
  const CMat4 Abc = Ab.cast<Complex>();
  const CMat4 Kc = K.cast<Complex>();
  const CMat4 Dc = (Ab - At).cast<Complex>();
  for (double r : radii) {
    for (int j = 0; j < n_angles; ++j) {
      const double th =
          M_PI - alpha + 2.0 * alpha * j / std::max(1, n_angles - 1);
      const Complex z = r * std::exp(Complex(0, th));
      const CMat4 M = (Abc - z * Kc).partialPivLu().solve(Dc);
      out.rho_sector = std::max(out.rho_sector, spectral_radius(M));
    }
  }
  return out;
}

double iteration_spectral_radius(const PeerTriplet& t, Boundary b, Complex z) {
  const Mat4& Ab = boundary_matrix(t, b);
  const Mat4& At = surrogate_matrix(t, b);
  const Mat4 K = t.kdiag.asDiagonal();
  const CMat4 M = (At.cast<Complex>() - z * K.cast<Complex>())
                      .partialPivLu()
                      .solve((At - Ab).cast<Complex>());
  return spectral_radius(M);
}

double eigenvalue_margin(const PeerTriplet& t, Boundary b) {
  const Mat4 M = t.kdiag.cwiseInverse().asDiagonal() * boundary_matrix(t, b);
  Eigen::EigenSolver<Mat4> es(M, false);
  return es.eigenvalues().real().minCoeff();
}

TripletReport verify_triplet(const PeerTriplet& t, unsigned seed) {
  TripletReport rep;
  rep.name = t.name;
  rep.grid_class = t.grid_class == GridClass::general ? "general" : "smooth";
  rep.alpha_deg = t.alpha_deg;
  rep.sigma_min = t.sigma_min;
  rep.sigma_max = t.sigma_max;

  auto fail = [&rep](const std::string& what) { rep.failures.push_back(what); };

  const char* family_names[] = {"forward stage order",   "adjoint stage order",
                                "start scheme order",    "end scheme order",
                                "start rank-1 structure", "end rank-1 structure"};
  for (double sigma : {0.7, 1.0, 1.3, 1.7, 2.0}) {
    const OrderResiduals r = order_residuals(t, sigma);
    const double vals[] = {r.forward,      r.adjoint,    r.start,
                           r.end,          r.rank1_start, r.rank1_end};
    for (int i = 0; i < 6; ++i) {
      rep.order_residual_max = std::max(rep.order_residual_max, vals[i]);
      if (vals[i] > 1e-10) {
        std::ostringstream os;
        os << family_names[i] << " residual " << vals[i] << " at sigma "
           << sigma;
        fail(os.str());
      }
    }
  }

  rep.structure = verify_structure(t);
  if (rep.structure.q33_residual > 1e-10)
    fail("transformed weight block is not e1 e1'");
  if (rep.structure.lsrk_residual > 1e-12) fail("last stage is not Runge-Kutta");
  if (rep.structure.rank1_ratio_start > 1e-8)
    fail("start correction is not rank one");
  if (rep.structure.rank1_ratio_end > 1e-8)
    fail("end correction is not rank one");
  if (rep.structure.phi_start_residual > 1e-10)
    fail("start correction-vector condition violated");
  if (rep.structure.phi_end_residual > 1e-10)
    fail("end correction-vector condition violated");
  if (rep.structure.triangular_residual > 1e-14)
    fail("sweep surrogates disagree below the diagonal");
  if (t.exact) {
    if (!rep.structure.flip_exact) fail("exact flip symmetry violated");
    if (rep.structure.bflip_residual > 1e-12)
      fail("companion matrix flip identity violated");
  }

  rep.errc = t.errc;

  for (double sigma : {1.0, 1.7}) {
    const auto sc = superconvergence_residual(t, sigma);
    rep.superconv[0] = std::max(rep.superconv[0], std::abs(sc[0]));
    rep.superconv[1] = std::max(rep.superconv[1], std::abs(sc[1]));
    if (std::abs(sc[0]) > 1e-12) fail("forward superconvergence violated");
    const double expected_adj =
        rep.structure.has_flip
            ? 0.0
            : t.a41_hat * (1.0 - sigma * sigma * sigma) / 6.0;
    if (std::abs(sc[1] - expected_adj) > 1e-12)
      fail("adjoint superconvergence defect off its closed form");
  }

  if (t.W) {
    rep.zero_stability_weighted = true;
    for (double sigma : {t.sigma_min, 1.0, t.sigma_max}) {
      const auto zs = zero_stability_norm(t, sigma);
      rep.zero_stability_worst = std::max(rep.zero_stability_worst, zs.value);
      if (std::abs(zs.value - 1.0) > 1e-10) {
        std::ostringstream os;
        os << "weighted zero-stability norm " << zs.value << " at sigma "
           << sigma;
        fail(os.str());
      }
    }
  } else {
    rep.zero_stability_weighted = false;
    for (double sigma : {t.sigma_min, 1.0, t.sigma_max}) {
      const auto zs = zero_stability_norm(t, sigma);
      rep.zero_stability_worst = std::max(rep.zero_stability_worst, zs.value);
    }
    rep.product_bound_value = product_bound(t, seed, 200, 200);
    if (rep.product_bound_value > 10.0)
      fail("companion products not bounded over random ratio sequences");
  }

  rep.stability_worst = stability_scan(t, t.alpha_deg);
  if (rep.stability_worst > 1.0 + 1e-8)
    fail("stability scan exceeds 1 inside the declared sector");

  rep.contraction_start =
      contraction_factors(t, Boundary::start, t.alpha_deg);
  rep.contraction_end = contraction_factors(t, Boundary::end, t.alpha_deg);
  if (rep.contraction_start.rho_sector >= 1.0)
    fail("start sweep iteration does not contract on the sector");
  if (rep.contraction_end.rho_sector >= 1.0)
    fail("end sweep iteration does not contract on the sector");

  rep.mu_start = eigenvalue_margin(t, Boundary::start);
  rep.mu_end = eigenvalue_margin(t, Boundary::end);
  if (rep.mu_start <= 0) fail("start scheme eigenvalue margin not positive");
  if (rep.mu_end <= 0) fail("end scheme eigenvalue margin not positive");

  return rep;
}

}  // namespace peeropt
