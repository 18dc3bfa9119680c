#pragma once

#include <string>
#include <vector>

#include "peeropt/problem.hpp"

namespace peeropt {

/// Rate constants and geometry of the 2D prostate-cancer growth model.
/// Units: lengths in micrometers, times in days; see the field comments for
/// the remaining units.
struct PcaParams {
  double lambda = 640.0;      // phase-field diffusivity, um^2/day
  double mobility = 2.5;      // M, 1/day
  double m_ref = 7.55e-2;     // proliferation scaling, 1/day
  double eta = 6.4e4;         // nutrient diffusivity, um^2/day
  double supply_h = 2.0;      // S_h, g/l/day
  double supply_c = 2.75;     // S_c, g/l/day
  double uptake_h = 2.0;      // gamma_h, g/l/day
  double uptake_c = 17.0;     // gamma_c, g/l/day
  double sigma_l = 0.4;       // nutrient threshold, g/l
  double sigma_r = 6.67e-2;   // nutrient reference, g/l
  double diff_p = 640.0;      // PSA diffusivity, um^2/day
  double alpha_h = 1.712e-2;  // healthy PSA production
  double alpha_c = 15.0 * 1.712e-2;
  double gamma_p = 0.274;     // PSA decay, 1/day
  double apoptosis = -1.37e-2 / 2.1e-2;  // A in m(sigma)
  double proliferation = 1.0;            // rho in m(sigma)
  double l_d = 3000.0;        // square edge length, um
  double axis1 = 150.0;       // initial tumour semi-axes, um
  double axis2 = 200.0;
  double c_sigma0 = 1.0, c_sigma1 = -0.8;    // sigma_0 = c0 + c1 phi_0
  double c_p0 = 0.0625, c_p1 = 0.7975;       // p_0 = c0 + c1 phi_0
  double tau_c = 5.0;         // drug decay time, days
  double beta_c = 1.59e-2;    // drug efficiency, m^2/mg
  double dose_single = 75.0;  // mg/m^2
  double u_max = 0.12;        // 1/day
  double horizon = 21.0;      // therapy cycle, days
  double growth_days = 60.0;  // untreated phase before therapy
  double dose3[3] = {58.49, 9.20, 5.03};
  double tdose3[3] = {2.85, 7.90, 9.16};
};

/// Objective weights: running tumour mass, terminal tumour mass, serum-PSA
/// tracking, and control penalty.
struct PcaWeights {
  double k1 = 1.0, k2 = 1.0, k3 = 1.0, k4 = 6.0;
};

/// Semidiscrete 2D prostate-cancer model on an m x m cell-centered grid:
/// phase field (homogeneous Dirichlet), nutrient and tissue PSA (homogeneous
/// Neumann), stacked row-wise, plus one augmented component carrying the
/// running cost.  The scalar control is the cytotoxic drug rate, boxed to
/// [0, u_max].  The initial state is the result of an untreated growth phase
/// computed once on first use with the scheme itself.
class PcaProblem : public ControlProblem {
 public:
  enum class Protocol { d1_target, d3_target };
  using Weights = PcaWeights;

  PcaProblem(int m_side, Protocol protocol, Weights weights = {},
             bool pretreat = true, int pretreat_steps = 240,
             std::string pretreat_triplet = "AP4o33vgi");

  std::string name() const override { return "pca2d"; }
  int state_dim() const override { return 3 * m_ * m_ + 1; }
  int control_dim() const override { return 1; }
  double t_begin() const override { return 0.0; }
  double t_end() const override { return params_.horizon; }
  VecX initial_state() const override;
  VecX control_lower() const override;
  VecX control_upper() const override;

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

  int m_side() const { return m_; }
  double dx() const { return dx_; }
  const PcaParams& params() const { return params_; }
  Protocol protocol() const { return protocol_; }
  const Weights& weights() const { return weights_; }

  /// Reference drug rate U_d(t) in the control penalty.
  double drug_target(double t) const;
  /// Standard protocol used as the optimizer starting point.
  double initial_guess(double t) const;
  /// Dose onset times that adapted grids should align with (empty for the
  /// single-dose target).
  std::vector<double> dose_times() const;

  /// Analytic fields at the very beginning of the untreated growth phase.
  VecX seeded_state() const;

  double volume(const VecX& y) const;     // trapezoidal integral of phi
  double serum_psa(const VecX& y) const;  // trapezoidal integral of p
  const VecX& quad_weights() const { return W_; }
  double quad_total() const { return Wsum_; }

 private:
  friend class PcaJacobian;

  void apply_laplacian(const double* v, double* out, bool dirichlet) const;

  int m_;
  double dx_;
  PcaParams params_;
  Protocol protocol_;
  Weights weights_;
  bool pretreat_;
  int pretreat_steps_;
  std::string pretreat_triplet_;
  VecX W_;
  double Wsum_ = 0.0;
  mutable VecX init_cache_;
  mutable bool init_ready_ = false;
};

/// Registry-style constructor; protocol is "d1-target" or "d3-target".
std::unique_ptr<PcaProblem> build_pca_problem(int m_side,
                                              const std::string& protocol,
                                              PcaProblem::Weights weights = {});

}  // namespace peeropt
