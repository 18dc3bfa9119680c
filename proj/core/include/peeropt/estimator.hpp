#pragma once

#include <vector>

#include "peeropt/sweeps.hpp"

namespace peeropt {

struct EstimatorOptions {
  double delta = 0.0;  // blend weight of the current block's own data
  double atol_y = 1e-8;
  double rtol_y = 1.0;
  double atol_p = 1e-8;
  double rtol_p = 1.0;
};

/// Scaled global-error measures per block and the mesh density built from
/// them.  theta carries the h^3-scaled leading error term weighted by the
/// scheme's error constant; psi is its balanced cube root per unit step.
struct ErrorEstimate {
  std::vector<double> theta_y;
  std::vector<double> theta_p;
  std::vector<double> psi;
  double omega = 1.0;  // balance factor max theta_y / max theta_p
};

/// Leading stage-polynomial term of one block: block * v1 with
/// v1 = 6 V^-T e4, the third-derivative extraction (exact h^3 y''' on
/// cubics).
VecX leading_term(const MatX& block, const PeerTriplet& t);

/// Cubic-coefficient extraction for the neighbouring slab's block. The
/// leading coefficient does not change under a shift of the expansion point,
/// so this is the same contraction as leading_term; callers supply the
/// sigma^3 factor that converts between the two local step scales.
VecX leading_term_shifted(const MatX& block, const PeerTriplet& t);

ErrorEstimate estimate_errors(const PeerTriplet& t, const Grid& g,
                              const Trajectory& Y, const Trajectory& P,
                              const EstimatorOptions& opt = {});

}  // namespace peeropt
