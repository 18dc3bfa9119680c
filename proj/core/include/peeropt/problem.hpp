#pragma once

#include <memory>
#include <string>

#include "peeropt/types.hpp"

namespace peeropt {

/// Linearization of the right-hand side frozen at one point (t, y, u).
/// Implementations own any factorization caches; a factorization of
/// (alpha I - gamma J) is reused across solves with the same (alpha, gamma).
class JacobianOp {
 public:
  virtual ~JacobianOp() = default;

  /// x := (alpha I - gamma J)^-1 b, or the transposed system.
  virtual void solve(double alpha, double gamma, const VecX& b, VecX& x,
                     bool transposed) = 0;

  /// out := J v, or J' v.
  virtual void apply(const VecX& v, VecX& out, bool transposed) const = 0;
};

/// An optimal-control problem in Mayer form: minimize C(y(T)) subject to
/// y' = f(t, y, u), y(t_begin) = y0, and box constraints on the control.
/// Running costs are carried by augmented state components.
class ControlProblem {
 public:
  virtual ~ControlProblem() = default;

  virtual std::string name() const = 0;
  virtual int state_dim() const = 0;
  virtual int control_dim() const = 0;
  virtual double t_begin() const = 0;
  virtual double t_end() const = 0;
  virtual VecX initial_state() const = 0;

  /// Box constraints; defaults are unbounded.
  virtual VecX control_lower() const;
  virtual VecX control_upper() const;

  virtual void rhs(double t, const VecX& y, const VecX& u, VecX& f) const = 0;

  virtual double objective(const VecX& yT) const = 0;
  virtual void objective_gradient(const VecX& yT, VecX& g) const = 0;

  /// g := (df/du)' p at (t, y, u).
  virtual void control_gradient(double t, const VecX& y, const VecX& u,
                                const VecX& p, VecX& g) const = 0;

  /// Pointwise minimizer of the Hamiltonian over the admissible box, when
  /// available in closed form.
  virtual bool has_pointwise_minimizer() const { return false; }
  virtual VecX pointwise_minimizer(double t, const VecX& y,
                                   const VecX& p) const;

  virtual std::unique_ptr<JacobianOp> linearize(double t, const VecX& y,
                                                const VecX& u) const = 0;
};

/// Dense finite-difference Jacobian of f with respect to y; test helper for
/// validating problem linearizations (central differences, step scaled per
/// component).
MatX fd_state_jacobian(const ControlProblem& p, double t, const VecX& y,
                       const VecX& u, double step = 1e-6);

/// Dense finite-difference Jacobian of f with respect to u.
MatX fd_control_jacobian(const ControlProblem& p, double t, const VecX& y,
                         const VecX& u, double step = 1e-6);

}  // namespace peeropt
