#include "peeropt/problem.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace peeropt {

VecX ControlProblem::control_lower() const {
  return VecX::Constant(control_dim(),
                        -std::numeric_limits<double>::infinity());
}

VecX ControlProblem::control_upper() const {
  return VecX::Constant(control_dim(), std::numeric_limits<double>::infinity());
}

VecX ControlProblem::pointwise_minimizer(double, const VecX&,
                                         const VecX&) const {
  throw std::logic_error(name() + " has no closed-form pointwise minimizer");
}

MatX fd_state_jacobian(const ControlProblem& p, double t, const VecX& y,
                       const VecX& u, double step) {
  const int d = p.state_dim();
  MatX J(d, d);
  VecX yp = y, ym = y, fp(d), fm(d);
  for (int j = 0; j < d; ++j) {
    const double h = step * (1.0 + std::abs(y(j)));
    yp(j) = y(j) + h;
    ym(j) = y(j) - h;
    p.rhs(t, yp, u, fp);
    p.rhs(t, ym, u, fm);
    J.col(j) = (fp - fm) / (2.0 * h);
    yp(j) = y(j);
    ym(j) = y(j);
  }
  return J;
}

MatX fd_control_jacobian(const ControlProblem& p, double t, const VecX& y,
                         const VecX& u, double step) {
  const int d = p.state_dim();
  const int m = p.control_dim();
  MatX J(d, m);
  VecX up = u, um = u, fp(d), fm(d);
  for (int j = 0; j < m; ++j) {
    const double h = step * (1.0 + std::abs(u(j)));
    up(j) = u(j) + h;
    um(j) = u(j) - h;
    p.rhs(t, y, up, fp);
    p.rhs(t, y, um, fm);
    J.col(j) = (fp - fm) / (2.0 * h);
    up(j) = u(j);
    um(j) = u(j);
  }
  return J;
}

}  // namespace peeropt
