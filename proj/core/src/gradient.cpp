#include "peeropt/gradient.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace peeropt {

ControlTrajectory reduced_gradient(const ControlProblem& prob,
                                   const PeerTriplet& t, const Grid& g,
                                   const ControlTrajectory& U,
                                   const Trajectory& Y, const Trajectory& P) {
  const int nb = U.nblocks();
  const int m = prob.control_dim();
  ControlTrajectory G;
  G.blocks.assign(static_cast<size_t>(nb), MatX(m, 4));
  VecX gi(m);
  for (int n = 0; n < nb; ++n) {
    const double h = g.h(n);
    for (int i = 0; i < 4; ++i) {
      prob.control_gradient(g.stage_time(n, t.c(i)),
                            Y.blocks[static_cast<size_t>(n)].col(i),
                            U.blocks[static_cast<size_t>(n)].col(i),
                            P.blocks[static_cast<size_t>(n)].col(i), gi);
      G.blocks[static_cast<size_t>(n)].col(i) = h * t.kdiag(i) * gi;
    }
  }
  return G;
}

ControlTrajectory project_box(const ControlProblem& prob,
                              const ControlTrajectory& U) {
  const VecX lo = prob.control_lower();
  const VecX hi = prob.control_upper();
  ControlTrajectory out = U;
  for (MatX& blk : out.blocks)
    for (int i = 0; i < 4; ++i)
      blk.col(i) = blk.col(i).cwiseMax(lo).cwiseMin(hi);
  return out;
}

double stationarity_norm(const ControlProblem& prob,
                         const ControlTrajectory& U,
                         const ControlTrajectory& G, double step) {
  const VecX lo = prob.control_lower();
  const VecX hi = prob.control_upper();
  double worst = 0;
  for (int n = 0; n < U.nblocks(); ++n) {
    const MatX& u = U.blocks[static_cast<size_t>(n)];
    const MatX& gr = G.blocks[static_cast<size_t>(n)];
    for (int i = 0; i < 4; ++i) {
      const VecX moved =
          (u.col(i) - step * gr.col(i)).cwiseMax(lo).cwiseMin(hi);
      worst = std::max(worst, (moved - u.col(i)).cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

double evaluate_objective(const ControlProblem& prob, const PeerTriplet& t,
                          const Grid& g, const ControlTrajectory& U,
                          const SolverOptions& opt, Trajectory* Y_out) {
  Trajectory Y = forward_solve(prob, t, g, U, opt);
  const double value = prob.objective(terminal_state(t, Y));
  if (Y_out) *Y_out = std::move(Y);
  return value;
}

double ReducedFunctional::value(const ControlTrajectory& U, Trajectory* Y_out) {
  SweepStats st;
  Trajectory Y = forward_solve(prob_, triplet_, grid_, U, solver_, &st);
  sweeps_ += st.total_newton_iters;
  ++evaluations_;
  const double v = prob_.objective(terminal_state(triplet_, Y));
  if (Y_out) *Y_out = std::move(Y);
  return v;
}

double ReducedFunctional::value_and_gradient(const ControlTrajectory& U,
                                             ControlTrajectory& G,
                                             Trajectory* Y_out,
                                             Trajectory* P_out) {
  Trajectory Y;
  const double v = value(U, &Y);
  gradient_with_state(U, Y, G, P_out);
  if (Y_out) *Y_out = std::move(Y);
  return v;
}

void ReducedFunctional::gradient_with_state(const ControlTrajectory& U,
                                            const Trajectory& Y,
                                            ControlTrajectory& G,
                                            Trajectory* P_out) {
  SweepStats st;
  Trajectory P = adjoint_solve(prob_, triplet_, grid_, U, Y, solver_, &st);
  sweeps_ += st.total_newton_iters;
  ++gradient_evaluations_;
  G = reduced_gradient(prob_, triplet_, grid_, U, Y, P);
  if (P_out) *P_out = std::move(P);
}

namespace {

double dot(const ControlTrajectory& a, const ControlTrajectory& b) {
  double s = 0;
  for (int n = 0; n < a.nblocks(); ++n)
    s += (a.blocks[static_cast<size_t>(n)].array() *
          b.blocks[static_cast<size_t>(n)].array())
             .sum();
  return s;
}

double inf_norm(const ControlTrajectory& a) {
  double s = 0;
  for (const MatX& blk : a.blocks)
    s = std::max(s, blk.cwiseAbs().maxCoeff());
  return s;
}

ControlTrajectory diff(const ControlTrajectory& a, const ControlTrajectory& b) {
  ControlTrajectory out = a;
  for (int n = 0; n < a.nblocks(); ++n)
    out.blocks[static_cast<size_t>(n)] -= b.blocks[static_cast<size_t>(n)];
  return out;
}

void axpy(double alpha, const ControlTrajectory& x, ControlTrajectory& y) {
  for (int n = 0; n < y.nblocks(); ++n)
    y.blocks[static_cast<size_t>(n)] +=
        alpha * x.blocks[static_cast<size_t>(n)];
}

ControlTrajectory step_candidate(const ControlProblem& prob,
                                 const ControlTrajectory& U,
                                 const ControlTrajectory& G, double step) {
  ControlTrajectory out = U;
  for (int n = 0; n < U.nblocks(); ++n)
    out.blocks[static_cast<size_t>(n)] -=
        step * G.blocks[static_cast<size_t>(n)];
  return project_box(prob, out);
}

void record(OptimizeResult& res, const ReducedFunctional& F, double objective,
            double stationarity, double step) {
  res.objective_history.push_back(objective);
  res.stationarity_history.push_back(stationarity);
  res.step_history.push_back(step);
  res.sweep_history.push_back(F.sweeps());
}

}  // namespace

OptimizeResult optimize(ReducedFunctional& F, const ControlTrajectory& U0,
                        const OptimizeOptions& opt) {
  const ControlProblem& prob = F.problem();
  OptimizeResult res;
  res.U = project_box(prob, U0);
  ControlTrajectory G;
  res.objective = F.value_and_gradient(res.U, G, &res.Y, &res.P);
  res.stationarity = stationarity_norm(prob, res.U, G, 1.0);
  record(res, F, res.objective, res.stationarity, 0.0);

  double step_accepted = opt.step0;
  ControlTrajectory U_prev, G_prev;
  bool have_prev = false;

  for (int it = 0; it < opt.max_iters; ++it) {
    if (res.stationarity <= opt.tol) {
      res.converged = true;
      res.message = "stationarity tolerance reached";
      res.sweeps_total = F.sweeps();
      return res;
    }

    // Barzilai-Borwein trial step from the last accepted pair; the Armijo
    // loop below keeps the objective monotone regardless.
    double step = opt.step0;
    if (have_prev) {
      const ControlTrajectory dU = diff(res.U, U_prev);
      const ControlTrajectory dG = diff(G, G_prev);
      const double num = dot(dU, dU);
      const double den = dot(dU, dG);
      if (den > 0 && std::isfinite(num / den))
        step = std::clamp(num / den, 1e-14, 1e14);
      else
        step = 2.0 * step_accepted;
    }

    bool accepted = false;
    double J_new = res.objective;
    ControlTrajectory U_new;
    Trajectory Y_new;
    for (int half = 0; half <= opt.max_halvings; ++half) {
      U_new = step_candidate(prob, res.U, G, step);
      const double decrease = dot(G, diff(res.U, U_new));
      if (decrease <= 0) break;  // projection arc blocked, nothing to gain
      bool solved = true;
      try {
        J_new = F.value(U_new, &Y_new);
      } catch (const SolverError&) {
        solved = false;
      }
      if (solved && J_new <= res.objective - opt.armijo_c1 * decrease) {
        accepted = true;
        break;
      }
      step *= 0.5;
      ++res.halvings_total;
    }
    if (!accepted) {
      res.line_search_failed = true;
      res.message = "line search failed, best iterate returned";
      res.sweeps_total = F.sweeps();
      return res;
    }

    U_prev = std::move(res.U);
    G_prev = G;
    have_prev = true;
    res.U = std::move(U_new);
    res.Y = std::move(Y_new);
    res.objective = J_new;
    F.gradient_with_state(res.U, res.Y, G, &res.P);
    step_accepted = step;
    res.iterations = it + 1;
    res.stationarity = stationarity_norm(prob, res.U, G, 1.0);
    record(res, F, res.objective, res.stationarity, step);
  }

  res.converged = res.stationarity <= opt.tol;
  res.message = res.converged ? "stationarity tolerance reached"
                              : "iteration limit reached";
  res.sweeps_total = F.sweeps();
  return res;
}

OptimizeResult optimize(const ControlProblem& prob, const PeerTriplet& t,
                        const Grid& g, const ControlTrajectory& U0,
                        const OptimizeOptions& opt) {
  ReducedFunctional F(prob, t, g, opt.solver);
  return optimize(F, U0, opt);
}

OptimizeResult minimize_quadratic(ReducedFunctional& F,
                                  const ControlTrajectory& U0,
                                  const OptimizeOptions& opt) {
  const ControlProblem& prob = F.problem();
  const VecX lo = prob.control_lower();
  const VecX hi = prob.control_upper();
  if (lo.maxCoeff() > -std::numeric_limits<double>::infinity() ||
      hi.minCoeff() < std::numeric_limits<double>::infinity())
    throw std::logic_error(
        "quadratic minimizer requires an unconstrained control");

  OptimizeResult res;
  res.U = U0;
  ControlTrajectory g;
  double J = F.value_and_gradient(res.U, g, &res.Y, &res.P);
  res.stationarity = inf_norm(g);
  record(res, F, J, res.stationarity, 0.0);

  ControlTrajectory d = g;
  for (MatX& blk : d.blocks) blk = -blk;
  double gg = dot(g, g);
  ControlTrajectory probe, Hd, g_old;

  for (int it = 0; it < opt.max_iters; ++it) {
    if (res.stationarity <= opt.tol) {
      res.converged = true;
      break;
    }

    // Curvature along d from one gradient evaluation: the gradient map of a
    // quadratic reduction is affine, so grad(U + d) - grad(U) = H d exactly.
    probe = res.U;
    axpy(1.0, d, probe);
    ControlTrajectory g_probe;
    F.value_and_gradient(probe, g_probe);
    Hd = diff(g_probe, g);
    double dHd = dot(d, Hd);
    double gd = dot(g, d);
    if (!(dHd > 0) || gd >= 0) {
      // Lost conjugacy or indefiniteness from roundoff: restart steepest.
      d = g;
      for (MatX& blk : d.blocks) blk = -blk;
      probe = res.U;
      axpy(1.0, d, probe);
      F.value_and_gradient(probe, g_probe);
      Hd = diff(g_probe, g);
      dHd = dot(d, Hd);
      gd = dot(g, d);
      if (!(dHd > 0)) {
        res.message = "curvature not positive along steepest descent";
        break;
      }
    }

    const double alpha = -gd / dHd;
    axpy(alpha, d, res.U);
    J += alpha * gd + 0.5 * alpha * alpha * dHd;

    g_old = g;
    if (opt.refresh_every > 0 && (it + 1) % opt.refresh_every == 0) {
      J = F.value_and_gradient(res.U, g);  // resync against drift
    } else {
      axpy(alpha, Hd, g);
    }

    const double gg_new = dot(g, g);
    double beta = std::max(0.0, (gg_new - dot(g, g_old)) / gg);
    if (!std::isfinite(beta)) beta = 0;
    for (int n = 0; n < d.nblocks(); ++n)
      d.blocks[static_cast<size_t>(n)] =
          -g.blocks[static_cast<size_t>(n)] +
          beta * d.blocks[static_cast<size_t>(n)];
    gg = gg_new;

    res.iterations = it + 1;
    res.stationarity = inf_norm(g);
    record(res, F, J, res.stationarity, alpha);
  }

  res.objective = F.value_and_gradient(res.U, g, &res.Y, &res.P);
  res.stationarity = inf_norm(g);
  res.converged = res.stationarity <= opt.tol;
  res.sweeps_total = F.sweeps();
  if (res.message.empty())
    res.message = res.converged ? "stationarity tolerance reached"
                                : "iteration limit reached";
  return res;
}

OptimizeResult minimize_quadratic(const ControlProblem& prob,
                                  const PeerTriplet& t, const Grid& g,
                                  const ControlTrajectory& U0,
                                  const OptimizeOptions& opt) {
  ReducedFunctional F(prob, t, g, opt.solver);
  return minimize_quadratic(F, U0, opt);
}

ControlTrajectory postprocess_controls(const ControlProblem& prob,
                                       const PeerTriplet& t, const Grid& g,
                                       const Trajectory& Y,
                                       const Trajectory& P) {
  if (!prob.has_pointwise_minimizer())
    throw std::logic_error("problem provides no pointwise minimizer");
  const int nb = Y.nblocks();
  ControlTrajectory out;
  out.blocks.assign(static_cast<size_t>(nb), MatX(prob.control_dim(), 4));
  for (int n = 0; n < nb; ++n)
    for (int i = 0; i < 4; ++i)
      out.blocks[static_cast<size_t>(n)].col(i) = prob.pointwise_minimizer(
          g.stage_time(n, t.c(i)), Y.blocks[static_cast<size_t>(n)].col(i),
          P.blocks[static_cast<size_t>(n)].col(i));
  return out;
}

}  // namespace peeropt
