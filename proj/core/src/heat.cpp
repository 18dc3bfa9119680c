#include "peeropt/heat.hpp"

#include <cmath>
#include <stdexcept>

namespace peeropt {

namespace {

double phi1(double z) {
  if (std::abs(z) < 1e-300) return 1.0;
  return std::expm1(z) / z;
}

/// Tridiagonal factorization of alpha I - gamma A for the heat operator.
/// Sub- and superdiagonals are the constant -gamma/dx^2; the diagonal carries
/// the (-1, -2, ..., -2, -3) stencil pattern.  Symmetric, so the transposed
/// solve is the same solve.
struct ThomasCache {
  double alpha = 0.0, gamma = 0.0;
  bool valid = false;
  std::vector<double> diag;  // pivots after elimination
  std::vector<double> low;   // multipliers
  double off = 0.0;          // constant off-diagonal of the original matrix
};

}  // namespace

class HeatJacobian : public JacobianOp {
 public:
  explicit HeatJacobian(const HeatProblem& prob) : prob_(prob) {}

  void solve(double alpha, double gamma, const VecX& b, VecX& x,
             bool transposed) override {
    (void)transposed;  // the operator is symmetric
    const int m = prob_.m_;
    if (b.size() != m + 1)
      throw std::invalid_argument("heat jacobian: bad vector length");
    if (!cache_.valid || cache_.alpha != alpha || cache_.gamma != gamma)
      factor(alpha, gamma);
    x.resize(m + 1);
    // forward elimination, then back substitution
    x[0] = b[0];
    for (int i = 1; i < m; ++i) x[i] = b[i] - cache_.low[i] * x[i - 1];
    x[m - 1] /= cache_.diag[m - 1];
    for (int i = m - 2; i >= 0; --i)
      x[i] = (x[i] - cache_.off * x[i + 1]) / cache_.diag[i];
    // augmented cost component decouples: alpha x = b
    x[m] = b[m] / alpha;
  }

  void apply(const VecX& v, VecX& out, bool transposed) const override {
    (void)transposed;
    out.resize(prob_.m_ + 1);
    out.head(prob_.m_) = prob_.apply_operator(v.head(prob_.m_));
    out[prob_.m_] = 0.0;
  }

 private:
  void factor(double alpha, double gamma) {
    const int m = prob_.m_;
    const double s = 1.0 / (prob_.dx_ * prob_.dx_);
    cache_.alpha = alpha;
    cache_.gamma = gamma;
    cache_.off = -gamma * s;
    cache_.diag.assign(m, 0.0);
    cache_.low.assign(m, 0.0);
    for (int i = 0; i < m; ++i) {
      double aii = (i == 0) ? -s : (i == m - 1 ? -3.0 * s : -2.0 * s);
      cache_.diag[i] = alpha - gamma * aii;
    }
    for (int i = 1; i < m; ++i) {
      cache_.low[i] = cache_.off / cache_.diag[i - 1];
      cache_.diag[i] -= cache_.low[i] * cache_.off;
    }
    cache_.valid = true;
  }

  const HeatProblem& prob_;
  ThomasCache cache_;
};

HeatProblem::HeatProblem(int m) : m_(m) {
  if (m < 3) throw std::invalid_argument("heat problem needs m >= 3");
  dx_ = 1.0 / m;
  gamma_ = 2.0 * m * m;
  lambda_.resize(static_cast<size_t>(m));
  omega_.resize(static_cast<size_t>(m));
  nu_.resize(static_cast<size_t>(m));
  eta0_.resize(m);
  for (int k = 1; k <= m; ++k) {
    double w = (k - 0.5) * M_PI;
    double sn = std::sin(w / (2.0 * m));
    omega_[static_cast<size_t>(k - 1)] = w;
    lambda_[static_cast<size_t>(k - 1)] = -4.0 * m * m * sn * sn;
    nu_[static_cast<size_t>(k - 1)] =
        2.0 / std::sqrt(2.0 * m + std::sin(2.0 * w) / std::sin(w / m));
  }
  v1_ = eigenvector(1);
  v2_ = eigenvector(2);
  for (int k = 1; k <= m; ++k) eta0_[k - 1] = eigenvector(k).sum();
  yhat_ = exact_state(1.0) - delta_hat_ * (v1_ + v2_);
}

VecX HeatProblem::initial_state() const {
  VecX y0 = VecX::Ones(m_ + 1);
  y0[m_] = 0.0;
  return y0;
}

VecX HeatProblem::eigenvector(int k) const {
  VecX v(m_);
  double w = omega_[static_cast<size_t>(k - 1)];
  double nu = nu_[static_cast<size_t>(k - 1)];
  for (int i = 1; i <= m_; ++i)
    v[i - 1] = nu * std::cos(w * (2.0 * i - 1.0) / (2.0 * m_));
  return v;
}

double HeatProblem::eigen_residual() const {
  double worst = 0.0;
  for (int k = 1; k <= m_; ++k) {
    VecX v = eigenvector(k);
    VecX r = apply_operator(v) - lambda_[static_cast<size_t>(k - 1)] * v;
    worst = std::max(worst, r.cwiseAbs().maxCoeff());
  }
  return worst;
}

VecX HeatProblem::apply_operator(const VecX& v) const {
  const double s = 1.0 / (dx_ * dx_);
  VecX out(m_);
  out[0] = s * (-v[0] + v[1]);
  for (int i = 1; i < m_ - 1; ++i)
    out[i] = s * (v[i - 1] - 2.0 * v[i] + v[i + 1]);
  out[m_ - 1] = s * (v[m_ - 2] - 3.0 * v[m_ - 1]);
  return out;
}

void HeatProblem::rhs(double t, const VecX& y, const VecX& u, VecX& f) const {
  (void)t;
  f.resize(m_ + 1);
  f.head(m_) = apply_operator(y.head(m_));
  f[m_ - 1] += gamma_ * u[0];
  f[m_] = u[0] * u[0];
}

double HeatProblem::objective(const VecX& yT) const {
  double track = (yT.head(m_) - yhat_).squaredNorm();
  return 0.5 * (track + yT[m_]);
}

void HeatProblem::objective_gradient(const VecX& yT, VecX& g) const {
  g.resize(m_ + 1);
  g.head(m_) = yT.head(m_) - yhat_;
  g[m_] = 0.5;
}

void HeatProblem::control_gradient(double t, const VecX& y, const VecX& u,
                                   const VecX& p, VecX& g) const {
  (void)t;
  (void)y;
  g.resize(1);
  g[0] = gamma_ * p[m_ - 1] + 2.0 * u[0] * p[m_];
}

VecX HeatProblem::pointwise_minimizer(double t, const VecX& y,
                                      const VecX& p) const {
  (void)t;
  (void)y;
  VecX u(1);
  u[0] = -gamma_ * p[m_ - 1] / (2.0 * p[m_]);
  return u;
}

std::unique_ptr<JacobianOp> HeatProblem::linearize(double t, const VecX& y,
                                                   const VecX& u) const {
  (void)t;
  (void)y;
  (void)u;
  return std::make_unique<HeatJacobian>(*this);
}

VecX HeatProblem::exact_state(double t) const {
  const double T = 1.0;
  double vm1 = v1_[m_ - 1], vm2 = v2_[m_ - 1];
  VecX y = VecX::Zero(m_);
  for (int k = 1; k <= m_; ++k) {
    double lk = lambda_[static_cast<size_t>(k - 1)];
    double forced = vm1 * std::exp(lambda_[0] * (T - t)) *
                        phi1((lk + lambda_[0]) * t) +
                    vm2 * std::exp(lambda_[1] * (T - t)) *
                        phi1((lk + lambda_[1]) * t);
    double vmk = eigenvector(k)[m_ - 1];
    double eta = std::exp(lk * t) * eta0_[k - 1] -
                 gamma_ * gamma_ * delta_hat_ * t * vmk * forced;
    y += eta * eigenvector(k);
  }
  return y;
}

VecX HeatProblem::exact_adjoint(double t) const {
  const double T = 1.0;
  return delta_hat_ * (std::exp(lambda_[0] * (T - t)) * v1_ +
                       std::exp(lambda_[1] * (T - t)) * v2_);
}

double HeatProblem::exact_control(double t) const {
  VecX p = exact_adjoint(t);
  return -gamma_ * p[m_ - 1];
}

}  // namespace peeropt
