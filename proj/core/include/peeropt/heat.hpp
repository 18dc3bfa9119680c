#pragma once

#include <vector>

#include "peeropt/problem.hpp"

namespace peeropt {

/// Boundary control of the 1D heat equation by the method of lines on m cell
/// centers, with a quadratic tracking objective.  The control cost runs in an
/// augmented state component, making the objective pure Mayer form.  The
/// target is constructed so that control, state and adjoint are known in
/// closed form through the eigenpairs of the difference operator.
class HeatProblem : public ControlProblem {
 public:
  explicit HeatProblem(int m = 250);

  std::string name() const override { return "heat1d"; }
  int state_dim() const override { return m_ + 1; }
  int control_dim() const override { return 1; }
  double t_begin() const override { return 0.0; }
  double t_end() const override { return 1.0; }
  VecX initial_state() const override;

  void rhs(double t, const VecX& y, const VecX& u, VecX& f) const override;
  double objective(const VecX& yT) const override;
  void objective_gradient(const VecX& yT, VecX& g) const override;
  void control_gradient(double t, const VecX& y, const VecX& u, const VecX& p,
                        VecX& g) const override;
  bool has_pointwise_minimizer() const override { return true; }
  VecX pointwise_minimizer(double t, const VecX& y,
                           const VecX& p) const override;
  std::unique_ptr<JacobianOp> linearize(double t, const VecX& y,
                                        const VecX& u) const override;

  int m() const { return m_; }
  double gamma() const { return gamma_; }

  /// Spectral data of the difference operator.
  double eigenvalue(int k) const { return lambda_[static_cast<size_t>(k - 1)]; }
  VecX eigenvector(int k) const;
  /// max_k ||A v_k - lambda_k v_k||_inf over all m eigenpairs.
  double eigen_residual() const;

  /// Closed-form optimal solution (first m components; the augmented cost
  /// component is excluded).
  VecX exact_state(double t) const;
  VecX exact_adjoint(double t) const;
  double exact_control(double t) const;
  const VecX& target() const { return yhat_; }

  /// Apply the difference operator to a length-m vector.
  VecX apply_operator(const VecX& v) const;

 private:
  friend class HeatJacobian;

  int m_;
  double dx_;
  double gamma_;
  double delta_hat_ = 1.0 / 75.0;  // target offset along the two slow modes
  std::vector<double> lambda_;     // eigenvalues, k = 1..m
  std::vector<double> omega_;      // frequencies
  std::vector<double> nu_;         // normalizations
  VecX eta0_;                      // modal coefficients of y(0) = ones
  VecX v1_, v2_;                   // the two slow eigenvectors
  VecX yhat_;                      // tracking target
};

}  // namespace peeropt
