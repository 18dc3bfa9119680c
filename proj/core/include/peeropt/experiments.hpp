#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "peeropt/equidist.hpp"
#include "peeropt/estimator.hpp"
#include "peeropt/gradient.hpp"
#include "peeropt/grid.hpp"
#include "peeropt/heat.hpp"
#include "peeropt/pca.hpp"
#include "peeropt/problem.hpp"
#include "peeropt/sweeps.hpp"
#include "peeropt/triplet.hpp"

namespace peeropt {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Parsed and validated JSON run configuration.  Unknown keys and keys not
/// applicable to the chosen problem are rejected.
struct RunConfig {
  std::string problem;  // "heat1d" or "pca2d"
  int m = 250;          // heat spatial points
  int m_side = 64;      // pca points per side
  std::string triplet = "AP4o33vgi";
  std::vector<int> steps;            // time slabs per run, one entry per row
  std::string grid_mode = "uniform";  // uniform | adapt | file
  std::string grid_file;              // set when grid_mode == "file"
  double opt_tol = 0.0;               // 0 = problem default
  int opt_max_iters = 500;
  std::string opt_method = "pg";      // pg | cg (cg: unconstrained quadratic)
  PcaProblem::Weights weights;
  std::string protocol = "d1-target";
  std::vector<std::string> outputs;  // artifact stem overrides, in order
  std::string canonical;             // sorted-key normalized dump
  std::string hash;                  // 16 hex digits of fnv1a64(canonical)
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);

/// Problem instance plus solver-facing policy derived from the config.
struct ProblemSetup {
  std::unique_ptr<ControlProblem> problem;
  const PeerTriplet* triplet = nullptr;
  OptimizeOptions opt;
  EstimatorOptions est;
  std::vector<double> fixed_points;  // inserted into adapted grids
  bool use_cg = false;               // route through the quadratic minimizer
};

ProblemSetup make_setup(const RunConfig& cfg);

/// Starting control for the optimizer at the stage times of a grid: zero for
/// the heat benchmark, the standard drug protocol for the PCa benchmark.
ControlTrajectory initial_control(const ControlProblem& prob, const Grid& g,
                                  const PeerTriplet& t);

/// One optimization run on the grid policy of the config: uniform and file
/// grids run once; adapt solves on the uniform grid, equidistributes the
/// estimated error density, and re-solves once on the adapted grid.
struct SolveOutcome {
  Grid grid;                         // grid of the reported solution
  OptimizeResult result;
  bool adapted = false;
  Grid uniform_grid;                 // pre-adaptation grid (adapt mode)
  OptimizeResult uniform_result;     // pre-adaptation solution (adapt mode)
  ErrorEstimate estimate;            // estimate driving the adaptation
  EquidistResult equi;
  MeshDensity density;               // density used for the adapted grid
};

SolveOutcome run_single(const RunConfig& cfg, const ProblemSetup& setup,
                        int nsteps);

/// Error norms against the closed-form optimum of the heat benchmark:
/// control over all stage times, terminal state, and the initial adjoint
/// reconstructed from the first block.
struct HeatErrors {
  double control = 0.0;
  double state = 0.0;
  double adjoint = 0.0;
};

HeatErrors heat_errors(const HeatProblem& prob, const PeerTriplet& t,
                       const Grid& g, const ControlTrajectory& U,
                       const Trajectory& Y, const Trajectory& P);

struct ConvergenceRow {
  int nsteps = 0;
  bool ok = false;
  std::string error;
  HeatErrors err;
  double order_control = 0.0, order_state = 0.0, order_adjoint = 0.0;
  // filled in adapt mode: errors of the pre-adaptation uniform solution
  bool has_uniform = false;
  HeatErrors err_uniform;
};

struct ConvergenceResult {
  std::vector<ConvergenceRow> rows;
  std::string csv;
};

/// Solver errors abort single rows, never the table.
ConvergenceResult run_convergence(const RunConfig& cfg);

/// Artifacts of one full solve: optimization trace, stagewise control table,
/// observables (PCa), grid and density files (adapt mode).  Paths get the
/// config hash spliced in before the extension.
struct SolveArtifacts {
  SolveOutcome outcome;
  std::vector<std::string> files;
};

SolveArtifacts run_solve(const RunConfig& cfg, const std::string& out_dir);

/// Adaptation demonstration: solve, estimate, equidistribute, re-solve, and
/// emit grid/density/step-ratio tables plus a before/after summary.
SolveArtifacts run_adapt_demo(const RunConfig& cfg, const std::string& out_dir);

/// "stem-hash.ext" inside a directory; creates no directories.
std::string artifact_path(const std::string& out_dir, const std::string& stem,
                          const std::string& hash, const std::string& ext);

}  // namespace peeropt
