#pragma once

#include <functional>
#include <vector>

#include "peeropt/grid.hpp"

namespace peeropt {

/// Continuous mesh density; larger values force smaller steps.
using MeshDensity = std::function<double(double)>;

/// Per-slab density as a piecewise-constant function on the grid's slabs.
MeshDensity density_from_blocks(const Grid& g, const std::vector<double>& psi);

struct EquidistOptions {
  double sigma_min = 0.5;
  double sigma_max = 2.0;
  double eta_max = 15.0;
  int max_passes = 30;           // mesh fixed-point passes
  double fixed_point_tol = 1e-10;  // relative to the interval length
  int cell_quadrature = 64;      // sub-samples per cell for the psi integral
  int smoothing_passes = 3;      // averaging passes tried on the density
  int projection_sweeps = 200;   // forward/backward sweeps of the fallback
};

struct EquidistResult {
  Grid grid;
  bool constraints_ok = false;
  bool projected = false;
  int passes_used = 0;
  int smoothing_rounds_used = 0;
};

/// Mesh generation by iterated inversion of the cumulative density integral:
/// each pass integrates psi over the current cells (composite Simpson),
/// places the new points at equal cumulative fractions, and repeats until the
/// mesh stops moving.  When the stepsize-ratio or eta constraints fail, the
/// density is smoothed by up to `smoothing_passes` single (1/4, 1/2, 1/4)
/// averaging passes in index space, regenerating after each and stopping as
/// soon as the grid is admissible.  If smoothing does not reach an admissible
/// grid, the closest candidate is projected directly onto the constraint set
/// by alternating forward/backward clamps of the step sequence, which lands
/// the offending ratios exactly on the window boundary instead of flattening
/// the density; such grids carry projected = true.  A grid that still
/// violates the constraints is returned with constraints_ok = false.
EquidistResult equidistribute(const MeshDensity& psi, double t0, double t1,
                              int nsteps, const EquidistOptions& opt = {});

/// Same, with interior points that must appear exactly in the mesh; steps are
/// allotted to the segments proportionally to their density integral.
EquidistResult equidistribute_fixed(const MeshDensity& psi, double t0,
                                    double t1, int nsteps,
                                    const std::vector<double>& fixed_points,
                                    const EquidistOptions& opt = {});

/// Largest deviation max_n |eta_n + (ln psi)'(t_n)| between the discrete
/// grid measure and the continuous one; second order for equidistributed
/// grids of smooth densities.
double eta_consistency(const Grid& g, const MeshDensity& psi);

}  // namespace peeropt
