#include "peeropt/pca.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "peeropt/sweeps.hpp"
#include "peeropt/triplet.hpp"

namespace peeropt {

namespace {

using SpMat = Eigen::SparseMatrix<double>;

// double-well potential and proliferation shape, with derivatives
double dwell_d1(double phi, double M) {
  return 2.0 * M * phi * (1.0 - phi) * (1.0 - 2.0 * phi);
}
double dwell_d2(double phi, double M) {
  return 2.0 * M * (1.0 - 6.0 * phi + 6.0 * phi * phi);
}
double shape_d1(double phi, double M) { return 6.0 * M * phi * (1.0 - phi); }
double shape_d2(double phi, double M) { return 6.0 * M * (1.0 - 2.0 * phi); }

double prolif(double sigma, const PcaParams& c) {
  double rho = c.proliferation, A = c.apoptosis;
  return c.m_ref * (0.5 * (rho + A) +
                    (rho - A) / M_PI *
                        std::atan((sigma - c.sigma_l) / c.sigma_r));
}
double prolif_d1(double sigma, const PcaParams& c) {
  double q = (sigma - c.sigma_l) / c.sigma_r;
  return c.m_ref * (c.proliferation - c.apoptosis) /
         (M_PI * c.sigma_r * (1.0 + q * q));
}

/// Delegates the model to a fixed starting state over the untreated phase;
/// only what forward_solve touches is meaningful.
class GrowthPhase : public ControlProblem {
 public:
  GrowthPhase(const PcaProblem& base, VecX y0, double days)
      : base_(base), y0_(std::move(y0)), days_(days) {}

  std::string name() const override { return "pca2d-growth"; }
  int state_dim() const override { return base_.state_dim(); }
  int control_dim() const override { return 1; }
  double t_begin() const override { return 0.0; }
  double t_end() const override { return days_; }
  VecX initial_state() const override { return y0_; }
  void rhs(double t, const VecX& y, const VecX& u, VecX& f) const override {
    base_.rhs(t, y, u, f);
  }
  double objective(const VecX& yT) const override {
    return base_.objective(yT);
  }
  void objective_gradient(const VecX& yT, VecX& g) const override {
    base_.objective_gradient(yT, g);
  }
  void control_gradient(double t, const VecX& y, const VecX& u, const VecX& p,
                        VecX& g) const override {
    base_.control_gradient(t, y, u, p, g);
  }
  std::unique_ptr<JacobianOp> linearize(double t, const VecX& y,
                                        const VecX& u) const override {
    return base_.linearize(t, y, u);
  }

 private:
  const PcaProblem& base_;
  VecX y0_;
  double days_;
};

}  // namespace

/// Sparse linearization frozen at one (t, y, u).  The state couples as three
/// diffusion blocks with diagonal reactions plus a dense last row from the
/// running cost; the last column is zero, so the augmented component is
/// eliminated by hand around a SparseLU of the 3m^2 field block.
class PcaJacobian : public JacobianOp {
 public:
  PcaJacobian(const PcaProblem& prob, const VecX& y, double u)
      : n_(3 * prob.m_ * prob.m_) {
    const PcaParams& c = prob.params_;
    const Weights& k = prob.weights_;
    const int m = prob.m_;
    const int m2 = m * m;
    const double s = 1.0 / (prob.dx_ * prob.dx_);

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<size_t>(19 * m2));
    auto stencil = [&](int base, double diff, bool dirichlet) {
      for (int j = 0; j < m; ++j) {
        for (int i = 0; i < m; ++i) {
          int idx = base + j * m + i;
          double diag = -4.0;
          auto nb = [&](bool inside, int off) {
            if (inside)
              trip.emplace_back(idx, idx + off, diff * s);
            else
              diag += dirichlet ? -1.0 : 1.0;
          };
          nb(i > 0, -1);
          nb(i < m - 1, +1);
          nb(j > 0, -m);
          nb(j < m - 1, +m);
          trip.emplace_back(idx, idx, diff * s * diag);
        }
      }
    };
    stencil(0, c.lambda, true);
    stencil(m2, c.eta, false);
    stencil(2 * m2, c.diff_p, false);

    for (int i = 0; i < m2; ++i) {
      double phi = y[i], sig = y[m2 + i];
      // phase-field row: reaction derivative and nutrient coupling
      trip.emplace_back(i, i,
                        -dwell_d2(phi, c.mobility) +
                            (prolif(sig, c) - u) * shape_d2(phi, c.mobility));
      trip.emplace_back(i, m2 + i,
                        prolif_d1(sig, c) * shape_d1(phi, c.mobility));
      // nutrient row
      trip.emplace_back(m2 + i, i,
                        -(c.uptake_c - c.uptake_h) * sig - c.supply_h +
                            c.supply_c);
      trip.emplace_back(m2 + i, m2 + i,
                        -c.uptake_h - (c.uptake_c - c.uptake_h) * phi);
      // PSA row
      trip.emplace_back(2 * m2 + i, i, c.alpha_c - c.alpha_h);
      trip.emplace_back(2 * m2 + i, 2 * m2 + i, -c.gamma_p);
    }
    fields_.resize(n_, n_);
    fields_.setFromTriplets(trip.begin(), trip.end());

    cost_row_ = VecX::Zero(n_);
    double psa_offset = c.alpha_h / c.gamma_p;
    double psa_int =
        prob.W_.dot(y.segment(2 * m2, m2)) - psa_offset * prob.Wsum_;
    for (int i = 0; i < m2; ++i) {
      cost_row_[i] = 2.0 * k.k1 * prob.W_[i] * y[i];
      cost_row_[2 * m2 + i] = 2.0 * k.k3 * psa_int * prob.W_[i];
    }
  }

  void solve(double alpha, double gamma, const VecX& b, VecX& x,
             bool transposed) override {
    if (b.size() != n_ + 1)
      throw std::invalid_argument("pca jacobian: bad vector length");
    Factor& f = factor(alpha, gamma);
    x.resize(n_ + 1);
    if (!transposed) {
      x.head(n_) = f.lu->solve(b.head(n_));
      x[n_] = (b[n_] + gamma * cost_row_.dot(x.head(n_))) / alpha;
    } else {
      x[n_] = b[n_] / alpha;
      VecX rhs2 = b.head(n_) + gamma * x[n_] * cost_row_;
      x.head(n_) = f.lu->transpose().solve(rhs2);
    }
    if (f.lu->info() != Eigen::Success)
      throw std::runtime_error("pca jacobian: sparse solve failed");
  }

  void apply(const VecX& v, VecX& out, bool transposed) const override {
    out.resize(n_ + 1);
    if (!transposed) {
      out.head(n_) = fields_ * v.head(n_);
      out[n_] = cost_row_.dot(v.head(n_));
    } else {
      out.head(n_) = fields_.transpose() * v.head(n_) + v[n_] * cost_row_;
      out[n_] = 0.0;
    }
  }

 private:
  using Weights = PcaProblem::Weights;
  struct Factor {
    double alpha, gamma;
    std::unique_ptr<Eigen::SparseLU<SpMat>> lu;
  };

  Factor& factor(double alpha, double gamma) {
    for (auto& f : cache_)
      if (f.alpha == alpha && f.gamma == gamma) return f;
    SpMat id(n_, n_);
    id.setIdentity();
    SpMat M = alpha * id - gamma * fields_;
    cache_.push_back({alpha, gamma,
                      std::make_unique<Eigen::SparseLU<SpMat>>()});
    cache_.back().lu->compute(M);
    if (cache_.back().lu->info() != Eigen::Success)
      throw std::runtime_error("pca jacobian: sparse factorization failed");
    return cache_.back();
  }

  int n_;
  SpMat fields_;
  VecX cost_row_;
  std::vector<Factor> cache_;
};

PcaProblem::PcaProblem(int m_side, Protocol protocol, Weights weights,
                       bool pretreat, int pretreat_steps,
                       std::string pretreat_triplet)
    : m_(m_side),
      protocol_(protocol),
      weights_(weights),
      pretreat_(pretreat),
      pretreat_steps_(pretreat_steps),
      pretreat_triplet_(std::move(pretreat_triplet)) {
  if (m_ < 4) throw std::invalid_argument("pca problem needs m_side >= 4");
  dx_ = params_.l_d / m_;
  // trapezoidal tensor weights on the cell-centered grid
  W_.resize(m_ * m_);
  auto line = [&](int i) { return (i == 0 || i == m_ - 1) ? 1.0 : 2.0; };
  for (int j = 0; j < m_; ++j)
    for (int i = 0; i < m_; ++i)
      W_[j * m_ + i] = 0.25 * dx_ * dx_ * line(i) * line(j);
  Wsum_ = W_.sum();
}

VecX PcaProblem::seeded_state() const {
  const PcaParams& c = params_;
  const int m2 = m_ * m_;
  VecX y = VecX::Zero(3 * m2 + 1);
  for (int j = 0; j < m_; ++j) {
    for (int i = 0; i < m_; ++i) {
      double x1 = (i + 0.5) * dx_ - 0.5 * c.l_d;
      double x2 = (j + 0.5) * dx_ - 0.5 * c.l_d;
      double r = std::sqrt(x1 * x1 / (c.axis1 * c.axis1) +
                           x2 * x2 / (c.axis2 * c.axis2));
      double phi = 0.5 - 0.5 * std::tanh(10.0 * (r - 1.0));
      int idx = j * m_ + i;
      y[idx] = phi;
      y[m2 + idx] = c.c_sigma0 + c.c_sigma1 * phi;
      y[2 * m2 + idx] = c.c_p0 + c.c_p1 * phi;
    }
  }
  return y;
}

VecX PcaProblem::initial_state() const {
  if (!pretreat_) return seeded_state();
  if (!init_ready_) {
    GrowthPhase growth(*this, seeded_state(), params_.growth_days);
    Grid g = uniform_grid(0.0, params_.growth_days, pretreat_steps_);
    ControlTrajectory U =
        ControlTrajectory::constant(VecX::Zero(1), g.last_block() + 1);
    const PeerTriplet& trip = builtin_triplet(pretreat_triplet_);
    Trajectory Y = forward_solve(growth, trip, g, U);
    init_cache_ = terminal_state(trip, Y);
    init_cache_[3 * m_ * m_] = 0.0;  // cost starts at zero for the therapy
    init_ready_ = true;
  }
  return init_cache_;
}

VecX PcaProblem::control_lower() const { return VecX::Zero(1); }

VecX PcaProblem::control_upper() const {
  return VecX::Constant(1, params_.u_max);
}

void PcaProblem::apply_laplacian(const double* v, double* out,
                                 bool dirichlet) const {
  const double s = 1.0 / (dx_ * dx_);
  const double ghost = dirichlet ? -1.0 : 1.0;
  for (int j = 0; j < m_; ++j) {
    for (int i = 0; i < m_; ++i) {
      int idx = j * m_ + i;
      double vc = v[idx];
      double acc = -4.0 * vc;
      acc += (i > 0) ? v[idx - 1] : ghost * vc;
      acc += (i < m_ - 1) ? v[idx + 1] : ghost * vc;
      acc += (j > 0) ? v[idx - m_] : ghost * vc;
      acc += (j < m_ - 1) ? v[idx + m_] : ghost * vc;
      out[idx] = s * acc;
    }
  }
}

void PcaProblem::rhs(double t, const VecX& y, const VecX& u, VecX& f) const {
  const PcaParams& c = params_;
  const int m2 = m_ * m_;
  f.resize(3 * m2 + 1);
  apply_laplacian(y.data(), f.data(), true);
  apply_laplacian(y.data() + m2, f.data() + m2, false);
  apply_laplacian(y.data() + 2 * m2, f.data() + 2 * m2, false);
  double U = u[0];
  for (int i = 0; i < m2; ++i) {
    double phi = y[i], sig = y[m2 + i], p = y[2 * m2 + i];
    f[i] = c.lambda * f[i] - dwell_d1(phi, c.mobility) +
           (prolif(sig, c) - U) * shape_d1(phi, c.mobility);
    f[m2 + i] = c.eta * f[m2 + i] - c.uptake_h * sig -
                (c.uptake_c - c.uptake_h) * sig * phi +
                c.supply_h * (1.0 - phi) + c.supply_c * phi;
    f[2 * m2 + i] = c.diff_p * f[2 * m2 + i] - c.gamma_p * p + c.alpha_h +
                    (c.alpha_c - c.alpha_h) * phi;
  }
  double phi_int = 0.0, psa_int = 0.0;
  const double psa_offset = c.alpha_h / c.gamma_p;
  for (int i = 0; i < m2; ++i) {
    phi_int += W_[i] * y[i] * y[i];
    psa_int += W_[i] * (y[2 * m2 + i] - psa_offset);
  }
  double du = U - drug_target(t);
  f[3 * m2] = weights_.k1 * phi_int + weights_.k3 * psa_int * psa_int +
              weights_.k4 * Wsum_ * du * du;
}

double PcaProblem::objective(const VecX& yT) const {
  const int m2 = m_ * m_;
  double phi_int = 0.0;
  for (int i = 0; i < m2; ++i) phi_int += W_[i] * yT[i] * yT[i];
  return weights_.k2 * phi_int + yT[3 * m2];
}

void PcaProblem::objective_gradient(const VecX& yT, VecX& g) const {
  const int m2 = m_ * m_;
  g = VecX::Zero(3 * m2 + 1);
  for (int i = 0; i < m2; ++i) g[i] = 2.0 * weights_.k2 * W_[i] * yT[i];
  g[3 * m2] = 1.0;
}

void PcaProblem::control_gradient(double t, const VecX& y, const VecX& u,
                                  const VecX& p, VecX& g) const {
  const int m2 = m_ * m_;
  double acc = 0.0;
  for (int i = 0; i < m2; ++i)
    acc -= shape_d1(y[i], params_.mobility) * p[i];
  double du = u[0] - drug_target(t);
  g.resize(1);
  g[0] = acc + 2.0 * weights_.k4 * Wsum_ * du * p[3 * m2];
}

VecX PcaProblem::pointwise_minimizer(double t, const VecX& y,
                                     const VecX& p) const {
  const int m2 = m_ * m_;
  double acc = 0.0;
  for (int i = 0; i < m2; ++i)
    acc += shape_d1(y[i], params_.mobility) * p[i];
  double denom = 2.0 * weights_.k4 * Wsum_ * p[3 * m2];
  if (denom == 0.0)
    throw std::logic_error("pca minimizer: degenerate control weight");
  double u = drug_target(t) + acc / denom;
  VecX out(1);
  out[0] = std::min(params_.u_max, std::max(0.0, u));
  return out;
}

std::unique_ptr<JacobianOp> PcaProblem::linearize(double t, const VecX& y,
                                                  const VecX& u) const {
  (void)t;
  return std::make_unique<PcaJacobian>(*this, y, u[0]);
}

double PcaProblem::drug_target(double t) const {
  if (protocol_ == Protocol::d1_target) return 0.0;
  const PcaParams& c = params_;
  double u = 0.0;
  for (int i = 0; i < 3; ++i)
    if (t >= c.tdose3[i])
      u += c.m_ref * c.beta_c * c.dose3[i] *
           std::exp(-(t - c.tdose3[i]) / c.tau_c);
  return u;
}

double PcaProblem::initial_guess(double t) const {
  if (protocol_ == Protocol::d3_target) return drug_target(t);
  const PcaParams& c = params_;
  return c.m_ref * c.beta_c * c.dose_single * std::exp(-t / c.tau_c);
}

std::vector<double> PcaProblem::dose_times() const {
  if (protocol_ == Protocol::d1_target) return {};
  return {params_.tdose3[0], params_.tdose3[1], params_.tdose3[2]};
}

double PcaProblem::volume(const VecX& y) const {
  return W_.dot(y.head(m_ * m_));
}

double PcaProblem::serum_psa(const VecX& y) const {
  return W_.dot(y.segment(2 * m_ * m_, m_ * m_));
}

std::unique_ptr<PcaProblem> build_pca_problem(int m_side,
                                              const std::string& protocol,
                                              PcaProblem::Weights weights) {
  PcaProblem::Protocol p;
  if (protocol == "d1-target")
    p = PcaProblem::Protocol::d1_target;
  else if (protocol == "d3-target")
    p = PcaProblem::Protocol::d3_target;
  else
    throw std::invalid_argument("unknown pca protocol: " + protocol +
                                " (expected d1-target or d3-target)");
  return std::make_unique<PcaProblem>(m_side, p, weights);
}

}  // namespace peeropt
