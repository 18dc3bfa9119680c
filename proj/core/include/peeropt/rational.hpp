#pragma once

#include <array>
#include <cstdint>
#include <numeric>
#include <stdexcept>

namespace peeropt {

/// Exact fraction with 64-bit terms, used for coefficient tables that are given
/// as rationals.  Arithmetic is limited to what table assembly needs (sums and
/// sign flips); everything stays far away from overflow for the magnitudes
/// involved.
struct Rat {
  std::int64_t num = 0;
  std::int64_t den = 1;

  constexpr Rat() = default;
  constexpr Rat(std::int64_t n) : num(n) {}
  Rat(std::int64_t n, std::int64_t d) : num(n), den(d) {
    if (den == 0) throw std::invalid_argument("Rat: zero denominator");
    normalize();
  }

  void normalize() {
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }

  friend Rat operator+(Rat a, Rat b) { return Rat(a.num * b.den + b.num * a.den, a.den * b.den); }
  friend Rat operator-(Rat a, Rat b) { return Rat(a.num * b.den - b.num * a.den, a.den * b.den); }
  friend Rat operator-(Rat a) { return Rat(-a.num, a.den); }
  friend bool operator==(Rat a, Rat b) { return a.num == b.num && a.den == b.den; }
  friend bool operator!=(Rat a, Rat b) { return !(a == b); }
};

using RatVec4 = std::array<Rat, 4>;
using RatMat4 = std::array<std::array<Rat, 4>, 4>;

inline RatVec4 row_sums(const RatMat4& m) {
  RatVec4 s{};
  for (int i = 0; i < 4; ++i) s[i] = m[i][0] + m[i][1] + m[i][2] + m[i][3];
  return s;
}

inline RatVec4 column_sums(const RatMat4& m) {
  RatVec4 s{};
  for (int j = 0; j < 4; ++j) s[j] = m[0][j] + m[1][j] + m[2][j] + m[3][j];
  return s;
}

/// Reverse both index orders: out[i][j] = m[3-i][3-j].
inline RatMat4 flip_both(const RatMat4& m) {
  RatMat4 out{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) out[i][j] = m[3 - i][3 - j];
  return out;
}

inline RatMat4 transpose(const RatMat4& m) {
  RatMat4 out{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) out[i][j] = m[j][i];
  return out;
}

inline bool equal(const RatMat4& a, const RatMat4& b) {
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (a[i][j] != b[i][j]) return false;
  return true;
}

inline bool equal(const RatVec4& a, const RatVec4& b) {
  for (int i = 0; i < 4; ++i)
    if (a[i] != b[i]) return false;
  return true;
}

}  // namespace peeropt
