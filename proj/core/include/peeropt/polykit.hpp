#pragma once

#include "peeropt/types.hpp"

namespace peeropt {

/// Vandermonde matrix V_q with entries c_i^{j-1}, i = 1..4, j = 1..q.
template <int Q>
Eigen::Matrix<double, 4, Q> vandermonde(const Vec4& c) {
  Eigen::Matrix<double, 4, Q> v;
  for (int i = 0; i < 4; ++i) {
    double p = 1.0;
    for (int j = 0; j < Q; ++j) {
      v(i, j) = p;
      p *= c(i);
    }
  }
  return v;
}

/// Upper triangular Pascal matrix, entries binom(j-1, i-1).
template <int Q>
Eigen::Matrix<double, Q, Q> pascal() {
  auto binom = [](int n, int k) {
    long long r = 1;
    for (int t = 1; t <= k; ++t) r = r * (n - k + t) / t;
    return static_cast<double>(r);
  };
  Eigen::Matrix<double, Q, Q> p = Eigen::Matrix<double, Q, Q>::Zero();
  for (int i = 0; i < Q; ++i)
    for (int j = i; j < Q; ++j) p(i, j) = binom(j, i);
  return p;
}

/// Inverse Pascal matrix, entries (-1)^{i+j} binom(j-1, i-1).
template <int Q>
Eigen::Matrix<double, Q, Q> pascal_inverse() {
  Eigen::Matrix<double, Q, Q> p = pascal<Q>();
  for (int i = 0; i < Q; ++i)
    for (int j = 0; j < Q; ++j)
      if ((i + j) % 2 != 0) p(i, j) = -p(i, j);
  return p;
}

/// Scaled shift matrix with entries i on the first superdiagonal
/// (the derivative operator in the monomial basis).
template <int Q>
Eigen::Matrix<double, Q, Q> scaled_shift() {
  Eigen::Matrix<double, Q, Q> e = Eigen::Matrix<double, Q, Q>::Zero();
  for (int i = 0; i + 1 < Q; ++i) e(i, i + 1) = i + 1;
  return e;
}

/// Stepsize-ratio scaling diag(1, sigma, ..., sigma^{q-1}).
template <int Q>
Eigen::Matrix<double, Q, Q> sigma_scaling(double sigma) {
  Eigen::Matrix<double, Q, Q> s = Eigen::Matrix<double, Q, Q>::Zero();
  double p = 1.0;
  for (int i = 0; i < Q; ++i) {
    s(i, i) = p;
    p *= sigma;
  }
  return s;
}

/// Elementwise power of a 4-vector.
inline Vec4 cwise_pow(const Vec4& v, int k) {
  Vec4 out = Vec4::Ones();
  for (int t = 0; t < k; ++t) out = out.cwiseProduct(v);
  return out;
}

}  // namespace peeropt
