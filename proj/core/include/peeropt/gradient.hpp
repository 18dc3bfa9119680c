#pragma once

#include <vector>

#include "peeropt/sweeps.hpp"

namespace peeropt {

/// Reduced objective gradient with respect to every stage control value:
/// G_{n,i} = h_n k_i (df/du)'(t_{n,i}, Y_{n,i}, U_{n,i}) P_{n,i}.
ControlTrajectory reduced_gradient(const ControlProblem& prob,
                                   const PeerTriplet& t, const Grid& g,
                                   const ControlTrajectory& U,
                                   const Trajectory& Y, const Trajectory& P);

/// Componentwise clamp of all stage values to the problem's control box.
ControlTrajectory project_box(const ControlProblem& prob,
                              const ControlTrajectory& U);

/// Stationarity measure ||clamp(U - step G) - U||_inf over all stages.
double stationarity_norm(const ControlProblem& prob,
                         const ControlTrajectory& U,
                         const ControlTrajectory& G, double step);

/// Forward solve followed by the terminal objective.
double evaluate_objective(const ControlProblem& prob, const PeerTriplet& t,
                          const Grid& g, const ControlTrajectory& U,
                          const SolverOptions& opt, Trajectory* Y_out = nullptr);

/// Objective/gradient oracle for the reduced problem C(U).  The optimizers
/// below consume only this interface, so an external algorithm can drive the
/// same evaluations.  Counters accumulate over the lifetime of the object.
class ReducedFunctional {
 public:
  ReducedFunctional(const ControlProblem& prob, const PeerTriplet& t,
                    const Grid& g, const SolverOptions& opt)
      : prob_(prob), triplet_(t), grid_(g), solver_(opt) {}

  /// C(U): one forward solve.
  double value(const ControlTrajectory& U, Trajectory* Y_out = nullptr);

  /// C(U) and its reduced gradient: one forward and one adjoint solve.
  double value_and_gradient(const ControlTrajectory& U, ControlTrajectory& G,
                            Trajectory* Y_out = nullptr,
                            Trajectory* P_out = nullptr);

  /// Adjoint half only, reusing an already solved forward trajectory for U;
  /// lets a line search pay one forward solve per trial and one adjoint per
  /// accepted point.
  void gradient_with_state(const ControlTrajectory& U, const Trajectory& Y,
                           ControlTrajectory& G, Trajectory* P_out = nullptr);

  const ControlProblem& problem() const { return prob_; }
  const PeerTriplet& triplet() const { return triplet_; }
  const Grid& grid() const { return grid_; }

  /// Cumulative inner (Newton/boundary) iterations over all solves so far.
  long sweeps() const { return sweeps_; }
  int evaluations() const { return evaluations_; }
  int gradient_evaluations() const { return gradient_evaluations_; }

 private:
  const ControlProblem& prob_;
  const PeerTriplet& triplet_;
  const Grid& grid_;
  SolverOptions solver_;
  long sweeps_ = 0;
  int evaluations_ = 0;
  int gradient_evaluations_ = 0;
};

struct OptimizeOptions {
  SolverOptions solver;
  double tol = 1e-8;     // on ||clamp(U - G) - U||_inf (unit trial step)
  int max_iters = 500;
  double armijo_c1 = 1e-4;
  int max_halvings = 40;
  double step0 = 1.0;     // first trial step before curvature information
  int refresh_every = 25; // true-gradient refresh cadence of the CG variant
};

struct OptimizeResult {
  ControlTrajectory U;
  Trajectory Y, P;
  double objective = 0;
  double stationarity = 0;
  int iterations = 0;
  bool converged = false;
  bool line_search_failed = false;  // best iterate returned regardless
  std::string message;
  std::vector<double> objective_history;      // per iterate, index 0 = U0
  std::vector<double> stationarity_history;   // unit-step metric per iterate
  std::vector<double> step_history;           // accepted step producing iterate k
  std::vector<long> sweep_history;            // cumulative inner iterations
  int halvings_total = 0;
  long sweeps_total = 0;
};

/// Projected gradient descent with Barzilai-Borwein trial steps, halved until
/// the Armijo condition holds along the projection arc.  Monotone in the
/// objective; stops on the unit-step stationarity measure.
OptimizeResult optimize(const ControlProblem& prob, const PeerTriplet& t,
                        const Grid& g, const ControlTrajectory& U0,
                        const OptimizeOptions& opt = {});

/// Same algorithm driven through a caller-owned evaluation hook.
OptimizeResult optimize(ReducedFunctional& F, const ControlTrajectory& U0,
                        const OptimizeOptions& opt = {});

/// Conjugate-gradient minimizer for reductions that are exactly quadratic in
/// the control (affine gradient map) and free of active box constraints;
/// consumes objective/gradient pairs through the evaluation hook.  Curvature
/// along each direction comes from one extra gradient evaluation, which is
/// exact for quadratic reductions.  The recorded objective history follows
/// the quadratic model; the final objective is re-evaluated.
OptimizeResult minimize_quadratic(ReducedFunctional& F,
                                  const ControlTrajectory& U0,
                                  const OptimizeOptions& opt = {});

OptimizeResult minimize_quadratic(const ControlProblem& prob,
                                  const PeerTriplet& t, const Grid& g,
                                  const ControlTrajectory& U0,
                                  const OptimizeOptions& opt = {});

/// Stagewise Hamiltonian minimizer u# = argmin_u H(Y_ni, u, P_ni) evaluated on
/// a solved trajectory pair; computed alongside, never replacing, the
/// optimizer's control.  Throws std::logic_error when the problem does not
/// provide a pointwise minimizer.
ControlTrajectory postprocess_controls(const ControlProblem& prob,
                                       const PeerTriplet& t, const Grid& g,
                                       const Trajectory& Y,
                                       const Trajectory& P);

}  // namespace peeropt
