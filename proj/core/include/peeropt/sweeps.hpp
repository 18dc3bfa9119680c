#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "peeropt/grid.hpp"
#include "peeropt/problem.hpp"
#include "peeropt/triplet.hpp"

namespace peeropt {

/// Stage values of one run: blocks[n] is state_dim x 4, column i approximating
/// y(t_n + c_i h_n) (forward) or the costate there (adjoint).
struct Trajectory {
  std::vector<MatX> blocks;

  int nblocks() const { return static_cast<int>(blocks.size()); }
};

/// Stagewise control values in the same layout (control_dim x 4 per block).
struct ControlTrajectory {
  std::vector<MatX> blocks;

  int nblocks() const { return static_cast<int>(blocks.size()); }
  VecX flatten() const;
  static ControlTrajectory from_flat(const VecX& v, int nblocks, int m);
  static ControlTrajectory constant(const VecX& u, int nblocks);
};

struct SolverOptions {
  double newton_tol = 1e-12;     // relative increment, infinity norm
  int newton_max_iters = 25;
  double boundary_tol = 1e-13;   // relative increment for boundary sweeps
  int boundary_max_sweeps = 30;
  bool refresh_jacobian = false;  // rebuild J every Newton iteration
  bool boundary_polish = true;    // one Newton pass after boundary sweeps
};

/// Iteration diagnostics of one forward or adjoint run.  Increment lists are
/// absolute infinity norms per sweep (the polish pass is not counted).
struct SweepStats {
  int total_newton_iters = 0;
  int max_newton_iters = 0;
  std::vector<double> start_increments;
  std::vector<double> end_increments;
};

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Solve the discrete forward scheme on the grid: starting block with A0,
/// interior blocks with A, terminal block with AN; throws SolverError when an
/// iteration fails to converge.
Trajectory forward_solve(const ControlProblem& prob, const PeerTriplet& t,
                         const Grid& g, const ControlTrajectory& U,
                         const SolverOptions& opt = {},
                         SweepStats* stats = nullptr);

/// Solve the discrete adjoint scheme backwards, consistent with the forward
/// discretization (exact transposition, including the w-weighted terminal
/// value).
Trajectory adjoint_solve(const ControlProblem& prob, const PeerTriplet& t,
                         const Grid& g, const ControlTrajectory& U,
                         const Trajectory& Y, const SolverOptions& opt = {},
                         SweepStats* stats = nullptr);

/// Discrete terminal state: the w-weighted stage combination of the last
/// block, exact to the stage order at t_end.
VecX terminal_state(const PeerTriplet& t, const Trajectory& Y);

/// Stage polynomial of one block at normalized position tau in [0, 1]
/// (tau = (time - t_n) / h_n); extrapolates for tau outside.
VecX block_value(const MatX& block, const PeerTriplet& t, double tau);

/// Evaluate a trajectory at an arbitrary time using the stage polynomial of
/// the block whose slab contains it (clamped at the ends).
VecX trajectory_value(const Trajectory& Y, const Grid& g, const PeerTriplet& t,
                      double time);

/// Re-sample a stagewise control onto another grid by piecewise-polynomial
/// evaluation at the new stage times.
ControlTrajectory interpolate_control(const ControlTrajectory& U,
                                      const Grid& from, const Grid& to,
                                      const PeerTriplet& t);

}  // namespace peeropt
