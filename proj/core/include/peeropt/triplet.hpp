#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "peeropt/rational.hpp"
#include "peeropt/types.hpp"

namespace peeropt {

/// Stepsize-ratio classes a triplet is certified for: arbitrary ratios within
/// [sigma_min, sigma_max], or ratios of smoothly varying grids only.
enum class GridClass { general, smooth };

/// Laurent polynomial in the stepsize ratio sigma with powers -1..3.
struct SigmaPoly {
  std::array<double, 5> coef{};  // sigma^-1, 1, sigma, sigma^2, sigma^3

  double operator()(double sigma) const {
    return coef[0] / sigma + coef[1] + sigma * (coef[2] + sigma * (coef[3] + sigma * coef[4]));
  }
};

/// Max-norm local error coefficients at sigma = 1 for the interior scheme, its
/// adjoint, and the two boundary schemes in both directions.
struct ErrorConstants {
  double interior_fwd = 0;
  double interior_adj = 0;
  double start_fwd = 0;
  double start_adj = 0;
  double end_fwd = 0;
  double end_adj = 0;
};

/// Exact-rational source tables, kept when the coefficients are published as
/// fractions so that symmetry checks can be done without any floating point.
struct ExactTables {
  RatVec4 c, kdiag, a, w, at0_diag, atN_diag;
  RatMat4 A, A0, AN;
  std::optional<RatMat4> W;
};

/// A two-step Peer triplet: the interior coefficient set (A, B(sigma), K),
/// the starting and terminal coefficient sets A0 / AN with their triangular
/// sweep surrogates, and metadata (stability angle, admissible ratio range).
struct PeerTriplet {
  std::string name;
  GridClass grid_class = GridClass::general;

  Vec4 c;      // stage nodes
  Vec4 kdiag;  // positive diagonal of K
  Mat4 A;      // lower triangular interior matrix
  Mat4 A0;     // starting-step matrix
  Mat4 AN;     // terminal-step matrix
  Mat4 At0;    // lower triangular surrogate for A0 sweeps
  Mat4 AtN;    // lower triangular surrogate for AN sweeps
  Vec4 a;      // A0 * ones
  Vec4 w;      // AN' * ones

  // Free entries of the congruence-transformed B(sigma): row 1 is all ones,
  // rows 2-3 only have a last-column entry, row 4 is (a41_hat, b42, b43, b44).
  double a41_hat = 0;
  SigmaPoly b24, b34, b42, b43, b44;

  double alpha_deg = 0;  // A(alpha)-stability angle
  double sigma_min = 0;  // admissible stepsize-ratio range
  double sigma_max = 0;

  std::optional<Mat4> W;  // weight matrix certifying the ratio range, if known

  Mat4 V;     // Vandermonde of c, cached
  Mat4 Vinv;  // and its inverse

  ErrorConstants errc;  // filled by build_triplet

  std::optional<ExactTables> exact;

  /// B-hat(sigma): the congruence image of B(sigma) in the Vandermonde basis.
  Mat4 bhat(double sigma) const;
};

/// Names of the built-in triplets.
std::vector<std::string> builtin_triplet_names();

/// Build a triplet by name.  Throws std::invalid_argument for unknown names,
/// listing the available ones.
PeerTriplet build_triplet(const std::string& name);

/// Cached access to a built-in triplet.
const PeerTriplet& builtin_triplet(const std::string& name);

/// Assemble the variable-stepsize companion matrix B(sigma).
/// Requires sigma > 0; B(sigma) * ones == A * ones holds to round-off.
Mat4 assemble_B(const PeerTriplet& t, double sigma);

}  // namespace peeropt
