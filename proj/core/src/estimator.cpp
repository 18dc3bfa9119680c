#include "peeropt/estimator.hpp"

#include <algorithm>
#include <cmath>


namespace peeropt {

VecX leading_term(const MatX& block, const PeerTriplet& t) {
  return block * (6.0 * t.Vinv.row(3).transpose());
}

VecX leading_term_shifted(const MatX& block, const PeerTriplet& t) {
  // Extracting the cubic coefficient from the neighbouring block reduces to
  // the same contraction: the leading coefficient of a polynomial is invariant
  // under shifting the expansion point, and the step-ratio rescaling is
  // applied by the caller as an explicit sigma^3 factor.
  return leading_term(block, t);
}

namespace {

double scaled_norm(const VecX& eps, const VecX& ref, double atol, double rtol) {
  double worst = 0;
  for (Eigen::Index i = 0; i < eps.size(); ++i)
    worst = std::max(worst,
                     std::abs(eps(i)) / (atol + rtol * std::abs(ref(i))));
  return worst;
}

}  // namespace

ErrorEstimate estimate_errors(const PeerTriplet& t, const Grid& g,
                              const Trajectory& Y, const Trajectory& P,
                              const EstimatorOptions& opt) {
  const int nb = Y.nblocks();
  const int last = nb - 1;
  const double delta = opt.delta;
  ErrorEstimate est;
  est.theta_y.resize(static_cast<size_t>(nb));
  est.theta_p.resize(static_cast<size_t>(nb));
  est.psi.resize(static_cast<size_t>(nb));

  auto begin_value = [&](const Trajectory& Z, int n) {
    return block_value(Z.blocks[static_cast<size_t>(n)], t, 0.0);
  };

  auto err_fwd = [&](int n) {
    if (n == 0) return t.errc.start_fwd;
    if (n == last) return t.errc.end_fwd;
    return t.errc.interior_fwd;
  };
  auto err_adj = [&](int n) {
    if (n == 0) return t.errc.start_adj;
    if (n == last) return t.errc.end_adj;
    return t.errc.interior_adj;
  };

  for (int n = 0; n < nb; ++n) {
    VecX eps_y, ref_y;
    if (n == 0) {
      eps_y = leading_term(Y.blocks[0], t);
      ref_y = begin_value(Y, 0).cwiseAbs();
    } else {
      const double s3 = std::pow(g.sigma(n), 3);
      eps_y = delta * leading_term(Y.blocks[static_cast<size_t>(n)], t) +
              (1.0 - delta) * s3 *
                  leading_term_shifted(Y.blocks[static_cast<size_t>(n) - 1], t);
      ref_y = delta * begin_value(Y, n).cwiseAbs() +
              (1.0 - delta) * begin_value(Y, n - 1).cwiseAbs();
    }
    est.theta_y[static_cast<size_t>(n)] =
        err_fwd(n) * scaled_norm(eps_y, ref_y, opt.atol_y, opt.rtol_y);

    VecX eps_p, ref_p;
    if (n == last) {
      eps_p = leading_term(P.blocks[static_cast<size_t>(last)], t);
      ref_p = block_value(P.blocks[static_cast<size_t>(last)], t, 1.0).cwiseAbs();
    } else {
      const double s3 = std::pow(g.sigma(n + 1), 3);
      eps_p = (1.0 - delta) * leading_term(P.blocks[static_cast<size_t>(n) + 1], t) +
              delta * s3 *
                  leading_term_shifted(P.blocks[static_cast<size_t>(n)], t);
      ref_p = delta * begin_value(P, n).cwiseAbs() +
              (1.0 - delta) * begin_value(P, n + 1).cwiseAbs();
    }
    est.theta_p[static_cast<size_t>(n)] =
        err_adj(n) * scaled_norm(eps_p, ref_p, opt.atol_p, opt.rtol_p);
  }

  const double max_y =
      *std::max_element(est.theta_y.begin(), est.theta_y.end());
  const double max_p =
      *std::max_element(est.theta_p.begin(), est.theta_p.end());
  est.omega = max_p > 0 ? max_y / max_p : 1.0;

  for (int n = 0; n < nb; ++n) {
    const double ty = est.theta_y[static_cast<size_t>(n)];
    const double tp = est.omega * est.theta_p[static_cast<size_t>(n)];
    const double h3 = std::pow(g.h(n), 3);
    est.psi[static_cast<size_t>(n)] = std::cbrt(std::hypot(ty, tp) / h3);
  }
  return est;
}

}  // namespace peeropt
