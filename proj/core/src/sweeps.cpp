#include "peeropt/sweeps.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

namespace peeropt {

namespace {

void check_shapes(const ControlProblem& prob, const Grid& g,
                  const ControlTrajectory& U) {
  if (g.nsteps() < 2)
    throw std::invalid_argument("two-step run needs at least two blocks");
  if (U.nblocks() != g.nsteps())
    throw std::invalid_argument("control has wrong number of blocks");
  for (const MatX& blk : U.blocks)
    if (blk.rows() != prob.control_dim() || blk.cols() != 4)
      throw std::invalid_argument("control block has wrong shape");
}

Vec4 monomials(double tau) {
  Vec4 m;
  m << 1.0, tau, tau * tau, tau * tau * tau;
  return m;
}

[[noreturn]] void fail_convergence(const char* where, int n, double incr) {
  std::ostringstream os;
  os << where << " failed to converge in block " << n
     << " (last increment " << incr << ")";
  throw SolverError(os.str());
}

double rel_increment(const MatX& d, const MatX& ref) {
  return d.cwiseAbs().maxCoeff() / (1.0 + ref.cwiseAbs().maxCoeff());
}

}  // namespace

VecX ControlTrajectory::flatten() const {
  const int nb = nblocks();
  const int m = nb > 0 ? static_cast<int>(blocks[0].rows()) : 0;
  VecX v(static_cast<Eigen::Index>(nb) * m * 4);
  Eigen::Index at = 0;
  for (const MatX& blk : blocks) {
    for (int i = 0; i < 4; ++i) {
      v.segment(at, m) = blk.col(i);
      at += m;
    }
  }
  return v;
}

ControlTrajectory ControlTrajectory::from_flat(const VecX& v, int nblocks,
                                               int m) {
  if (v.size() != static_cast<Eigen::Index>(nblocks) * m * 4)
    throw std::invalid_argument("flat control has wrong length");
  ControlTrajectory U;
  U.blocks.assign(static_cast<size_t>(nblocks), MatX(m, 4));
  Eigen::Index at = 0;
  for (MatX& blk : U.blocks) {
    for (int i = 0; i < 4; ++i) {
      blk.col(i) = v.segment(at, m);
      at += m;
    }
  }
  return U;
}

ControlTrajectory ControlTrajectory::constant(const VecX& u, int nblocks) {
  ControlTrajectory U;
  U.blocks.assign(static_cast<size_t>(nblocks),
                  u.replicate(1, 4));
  return U;
}

VecX terminal_state(const PeerTriplet& t, const Trajectory& Y) {
  return Y.blocks.back() * t.w;
}

VecX block_value(const MatX& block, const PeerTriplet& t, double tau) {
  return block * (t.Vinv.transpose() * monomials(tau));
}

namespace {

int containing_block(const Grid& g, double time) {
  const auto it = std::upper_bound(g.t.begin(), g.t.end(), time);
  int n = static_cast<int>(it - g.t.begin()) - 1;
  if (n < 0) n = 0;
  if (n > g.last_block()) n = g.last_block();
  return n;
}

}  // namespace

VecX trajectory_value(const Trajectory& Y, const Grid& g, const PeerTriplet& t,
                      double time) {
  const int n = containing_block(g, time);
  const double tau = (time - g.t[static_cast<size_t>(n)]) / g.h(n);
  return block_value(Y.blocks[static_cast<size_t>(n)], t, tau);
}

ControlTrajectory interpolate_control(const ControlTrajectory& U,
                                      const Grid& from, const Grid& to,
                                      const PeerTriplet& t) {
  if (U.nblocks() != from.nsteps())
    throw std::invalid_argument("control does not match its grid");
  const Eigen::Index m = U.blocks.empty() ? 0 : U.blocks[0].rows();
  ControlTrajectory out;
  out.blocks.assign(static_cast<size_t>(to.nsteps()), MatX(m, 4));
  for (int n = 0; n < to.nsteps(); ++n) {
    for (int i = 0; i < 4; ++i) {
      const double time = to.stage_time(n, t.c(i));
      const int src = containing_block(from, time);
      const double tau = (time - from.t[static_cast<size_t>(src)]) / from.h(src);
      out.blocks[static_cast<size_t>(n)].col(i) =
          block_value(U.blocks[static_cast<size_t>(src)], t, tau);
    }
  }
  return out;
}

Trajectory forward_solve(const ControlProblem& prob, const PeerTriplet& t,
                         const Grid& g, const ControlTrajectory& U,
                         const SolverOptions& opt, SweepStats* stats) {
  check_shapes(prob, g, U);
  const int nb = g.nsteps();
  const int d = prob.state_dim();
  const Vec4& c = t.c;
  const Vec4& k = t.kdiag;

  Trajectory Y;
  Y.blocks.assign(static_cast<size_t>(nb), MatX(d, 4));

  VecX f(d), x(d);

  // Evaluate the right-hand side at every stage of a block.
  auto eval_F = [&](int n, const MatX& blk, MatX& F) {
    for (int i = 0; i < 4; ++i) {
      prob.rhs(g.stage_time(n, c(i)), blk.col(i), U.blocks[static_cast<size_t>(n)].col(i), f);
      F.col(i) = f;
    }
  };

  // Triangular sweep iteration for a boundary block: solve
  // Ab*Y = base + h K F(Y) with the lower-triangular surrogate At as
  // preconditioner and a Jacobian frozen at the slab start.
  auto boundary_block = [&](int n, const Mat4& Ab, const Mat4& At,
                            const MatX& base, const VecX& y_begin,
                            std::vector<double>* increments) {
    const double h = g.h(n);
    const MatX& Ublk = U.blocks[static_cast<size_t>(n)];
    const VecX u_begin = Ublk * t.Vinv.row(0).transpose();
    auto J = prob.linearize(g.t[static_cast<size_t>(n)], y_begin, u_begin);

    MatX blk = y_begin.replicate(1, 4);
    if (n > 0) {
      for (int i = 0; i < 4; ++i)
        blk.col(i) = block_value(Y.blocks[static_cast<size_t>(n) - 1], t,
                                 1.0 + c(i) * g.sigma(n));
    }

    MatX F(d, 4), R(d, 4), dY(d, 4);
    bool done = false;
    double incr = 0;
    for (int sweep = 0; sweep < opt.boundary_max_sweeps; ++sweep) {
      eval_F(n, blk, F);
      R = base + h * F * k.asDiagonal() - blk * Ab.transpose();
      for (int i = 0; i < 4; ++i) {
        VecX ri = R.col(i);
        for (int j = 0; j < i; ++j) ri -= At(i, j) * dY.col(j);
        J->solve(At(i, i), h * k(i), ri, x, false);
        dY.col(i) = x;
      }
      blk += dY;
      if (increments) increments->push_back(dY.cwiseAbs().maxCoeff());
      incr = rel_increment(dY, blk);
      if (incr <= opt.boundary_tol) {
        done = true;
        break;
      }
    }
    if (!done) fail_convergence("boundary sweep iteration", n, incr);

    if (opt.boundary_polish) {
      for (int i = 0; i < 4; ++i) {
        const double ti = g.stage_time(n, c(i));
        auto Ji = prob.linearize(ti, blk.col(i), Ublk.col(i));
        prob.rhs(ti, blk.col(i), Ublk.col(i), f);
        VecX ri = base.col(i) + h * k(i) * f;
        for (int j = 0; j < 4; ++j) ri -= Ab(i, j) * blk.col(j);
        Ji->solve(Ab(i, i), h * k(i), ri, x, false);
        blk.col(i) += x;
      }
    }
    Y.blocks[static_cast<size_t>(n)] = blk;
  };

  // Starting block.
  {
    const VecX y0 = prob.initial_state();
    const MatX base = y0 * t.a.transpose();
    boundary_block(0, t.A0, t.At0, base, y0,
                   stats ? &stats->start_increments : nullptr);
  }

  // Interior blocks: stagewise modified Newton down the triangle of A.
  for (int n = 1; n < nb - 1; ++n) {
    const double h = g.h(n);
    const Mat4 B = assemble_B(t, g.sigma(n));
    const MatX base = Y.blocks[static_cast<size_t>(n) - 1] * B.transpose();
    const MatX& Ublk = U.blocks[static_cast<size_t>(n)];
    MatX blk(d, 4);
    for (int i = 0; i < 4; ++i)
      blk.col(i) = block_value(Y.blocks[static_cast<size_t>(n) - 1], t,
                               1.0 + c(i) * g.sigma(n));

    for (int i = 0; i < 4; ++i) {
      const double ti = g.stage_time(n, c(i));
      VecX yi = blk.col(i);
      VecX rhs_i = base.col(i);
      for (int j = 0; j < i; ++j) rhs_i -= t.A(i, j) * blk.col(j);

      auto J = prob.linearize(ti, yi, Ublk.col(i));
      bool done = false;
      double incr = 0;
      for (int it = 0; it < opt.newton_max_iters; ++it) {
        prob.rhs(ti, yi, Ublk.col(i), f);
        const VecX res = rhs_i + h * k(i) * f - t.A(i, i) * yi;
        J->solve(t.A(i, i), h * k(i), res, x, false);
        yi += x;
        if (stats) {
          ++stats->total_newton_iters;
          stats->max_newton_iters = std::max(stats->max_newton_iters, it + 1);
        }
        incr = x.cwiseAbs().maxCoeff() / (1.0 + yi.cwiseAbs().maxCoeff());
        if (incr <= opt.newton_tol) {
          done = true;
          break;
        }
        if (opt.refresh_jacobian) J = prob.linearize(ti, yi, Ublk.col(i));
      }
      if (!done) fail_convergence("stage Newton iteration", n, incr);
      blk.col(i) = yi;
    }
    Y.blocks[static_cast<size_t>(n)] = blk;
  }

  // Terminal block.
  {
    const int n = nb - 1;
    const Mat4 B = assemble_B(t, g.sigma(n));
    const MatX base = Y.blocks[static_cast<size_t>(n) - 1] * B.transpose();
    const VecX y_begin = Y.blocks[static_cast<size_t>(n) - 1].col(3);
    boundary_block(n, t.AN, t.AtN, base, y_begin,
                   stats ? &stats->end_increments : nullptr);
  }

  return Y;
}

Trajectory adjoint_solve(const ControlProblem& prob, const PeerTriplet& t,
                         const Grid& g, const ControlTrajectory& U,
                         const Trajectory& Y, const SolverOptions& opt,
                         SweepStats* stats) {
  check_shapes(prob, g, U);
  const int nb = g.nsteps();
  if (Y.nblocks() != nb)
    throw std::invalid_argument("state trajectory has wrong number of blocks");
  const int d = prob.state_dim();
  const Vec4& c = t.c;
  const Vec4& k = t.kdiag;

  Trajectory P;
  P.blocks.assign(static_cast<size_t>(nb), MatX(d, 4));

  VecX x(d), jv(d);

  auto stage_ops = [&](int n) {
    std::vector<std::unique_ptr<JacobianOp>> ops(4);
    for (int i = 0; i < 4; ++i)
      ops[static_cast<size_t>(i)] = prob.linearize(
          g.stage_time(n, c(i)), Y.blocks[static_cast<size_t>(n)].col(i),
          U.blocks[static_cast<size_t>(n)].col(i));
    return ops;
  };

  // Linear sweep iteration for a boundary block of the transposed system:
  // Ab' P = base + h K J' P, preconditioned by the upper-triangular At'.
  auto boundary_block = [&](int n, const Mat4& Ab, const Mat4& At,
                            const MatX& base, const VecX& p_guess,
                            std::vector<double>* increments) {
    const double h = g.h(n);
    auto ops = stage_ops(n);
    MatX blk = p_guess.replicate(1, 4);
    MatX JtP(d, 4), R(d, 4), dP(d, 4);
    bool done = false;
    double incr = 0;
    for (int sweep = 0; sweep < opt.boundary_max_sweeps; ++sweep) {
      for (int i = 0; i < 4; ++i) {
        ops[static_cast<size_t>(i)]->apply(blk.col(i), jv, true);
        JtP.col(i) = jv;
      }
      R = base + h * JtP * k.asDiagonal() - blk * Ab;
      for (int i = 3; i >= 0; --i) {
        VecX ri = R.col(i);
        for (int j = i + 1; j < 4; ++j) ri -= At(j, i) * dP.col(j);
        ops[static_cast<size_t>(i)]->solve(At(i, i), h * k(i), ri, x, true);
        dP.col(i) = x;
      }
      blk += dP;
      if (increments) increments->push_back(dP.cwiseAbs().maxCoeff());
      incr = rel_increment(dP, blk);
      if (incr <= opt.boundary_tol) {
        done = true;
        break;
      }
    }
    if (!done) fail_convergence("adjoint boundary sweep iteration", n, incr);
    P.blocks[static_cast<size_t>(n)] = blk;
  };

  // Terminal block: AN' P_N = w pT + h K J' P_N.
  VecX pT(d);
  prob.objective_gradient(terminal_state(t, Y), pT);
  {
    const int n = nb - 1;
    const MatX base = pT * t.w.transpose();
    boundary_block(n, t.AN, t.AtN, base, pT,
                   stats ? &stats->end_increments : nullptr);
  }

  // Interior blocks: back substitution down A', one linear stage solve each.
  for (int n = nb - 2; n >= 1; --n) {
    const double h = g.h(n);
    const Mat4 B = assemble_B(t, g.sigma(n + 1));
    const MatX base = P.blocks[static_cast<size_t>(n) + 1] * B;
    auto ops = stage_ops(n);
    MatX& blk = P.blocks[static_cast<size_t>(n)];
    for (int i = 3; i >= 0; --i) {
      VecX ri = base.col(i);
      for (int j = i + 1; j < 4; ++j) ri -= t.A(j, i) * blk.col(j);
      ops[static_cast<size_t>(i)]->solve(t.A(i, i), h * k(i), ri, x, true);
      blk.col(i) = x;
    }
  }

  // Starting block: A0' P_0 = B(sigma_1)' P_1 + h K J' P_0.
  {
    const Mat4 B = assemble_B(t, g.sigma(1));
    const MatX base = P.blocks[1] * B;
    boundary_block(0, t.A0, t.At0, base, VecX(P.blocks[1].col(0)),
                   stats ? &stats->start_increments : nullptr);
  }

  return P;
}

}  // namespace peeropt
