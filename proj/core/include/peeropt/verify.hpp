#pragma once

#include <array>
#include <string>
#include <vector>

#include "peeropt/triplet.hpp"
#include "peeropt/types.hpp"

namespace peeropt {

enum class Boundary { start, end };

/// Max-norm residuals of the stage-order conditions at a given stepsize
/// ratio: the interior scheme, its adjoint, both boundary schemes, and the
/// rank-one structure of the boundary corrections.
struct OrderResiduals {
  double forward = 0;
  double adjoint = 0;
  double start = 0;
  double end = 0;
  double rank1_start = 0;
  double rank1_end = 0;

  double max() const;
};

OrderResiduals order_residuals(const PeerTriplet& t, double sigma);

/// Structural checks that do not depend on sigma (or are sampled over it).
struct StructureReport {
  double q33_residual = 0;        // transformed weight block vs e1 e1'
  double lsrk_residual = 0;       // ones'A = e4' and c4 = 1
  double adjoint_lsrk_residual = 0;  // V'A ones = e1
  bool adjoint_lsrk = false;
  double rank1_ratio_start = 0;   // second/first singular value of A0 - A
  double rank1_ratio_end = 0;
  double phi_start_residual = 0;  // correction-vector conditions at sigma = 1
  double phi_end_residual = 0;
  double triangular_residual = 0;  // surrogates agree below the diagonal
  bool has_flip = false;
  bool flip_exact = false;        // rational tables flip exactly
  double flip_residual = 0;       // double tables under the flip permutation
  double bflip_residual = 0;      // B(2) vs B(1/2)' under the flip
};

StructureReport verify_structure(const PeerTriplet& t);

/// Leading local-error coefficient vectors (third-order defect / 6).
Vec4 beta3(const PeerTriplet& t, double sigma);
Vec4 beta3_adjoint(const PeerTriplet& t, double sigma);
Vec4 beta3_start(const PeerTriplet& t);
Vec4 beta3_start_adjoint(const PeerTriplet& t);
Vec4 beta3_end(const PeerTriplet& t);
Vec4 beta3_end_adjoint(const PeerTriplet& t);

/// Max norms of the six coefficient vectors at sigma = 1.
ErrorConstants error_constants(const PeerTriplet& t);

/// The pair (ones'A beta3(sigma), ones'A' beta3_adjoint(sigma)); both vanish
/// identically for a triplet that keeps full order on arbitrary grids.
std::array<double, 2> superconvergence_residual(const PeerTriplet& t,
                                                double sigma);

struct ZeroStabilityResult {
  double value = 0;
  bool weighted_norm = false;  // true: ||W^-1 A^-1 B(sigma) W||_inf
};

/// Weighted norm of the companion matrix when the triplet carries a weight
/// matrix, otherwise the spectral radius (flagged).
ZeroStabilityResult zero_stability_norm(const PeerTriplet& t, double sigma);

/// Worst row-sum norm of random products A^-1 B(sigma_1) ... A^-1 B(sigma_k)
/// with ratios drawn uniformly from the triplet's admissible range.
double product_bound(const PeerTriplet& t, unsigned seed, int n_sequences,
                     int k_max);

/// Worst spectral radius of (A - zK)^-1 B(1) over the sector
/// |arg(z) - pi| <= angle, |z| in [1e-4, 1e6] log-sampled.
double stability_scan(const PeerTriplet& t, double angle_deg,
                      int n_radii = 200, int n_angles = 41);

/// Worst spectral radius of (A - i xi K)^-1 B(1) for |xi| <= xi_max.
double imaginary_axis_scan(const PeerTriplet& t, double xi_max, int n = 201);

/// Convergence factors of the triangular sweep iteration for one boundary
/// scheme: on the negative real axis and over the stability sector.
struct ContractionFactors {
  double rho_real = 0;
  double rho_sector = 0;
};

ContractionFactors contraction_factors(const PeerTriplet& t, Boundary b,
                                       double angle_deg, int n_radii = 400,
                                       int n_angles = 40);

/// Spectral radius of the sweep iteration matrix (At - zK)^-1 (At - Ab) at a
/// single point z.
double iteration_spectral_radius(const PeerTriplet& t, Boundary b, Complex z);

/// Smallest real part of the eigenvalues of K^-1 A_b; positive values admit
/// arbitrarily stiff problems in the boundary steps.
double eigenvalue_margin(const PeerTriplet& t, Boundary b);

/// Aggregate verification for one triplet, with named failures.
struct TripletReport {
  std::string name;
  std::string grid_class;
  double alpha_deg = 0;
  double sigma_min = 0;
  double sigma_max = 0;
  double order_residual_max = 0;
  StructureReport structure;
  ErrorConstants errc;
  std::array<double, 2> superconv = {0, 0};  // worst over sampled sigma
  double zero_stability_worst = 0;
  bool zero_stability_weighted = false;
  double product_bound_value = 0;  // only filled without a weight matrix
  double stability_worst = 0;      // scan at alpha_deg
  ContractionFactors contraction_start, contraction_end;
  double mu_start = 0;
  double mu_end = 0;
  std::vector<std::string> failures;

  bool pass() const { return failures.empty(); }
};

TripletReport verify_triplet(const PeerTriplet& t, unsigned seed = 20250612);

}  // namespace peeropt
