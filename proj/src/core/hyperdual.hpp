// Second-order forward-mode scalar. An HDual carries a value, two directional
// first derivatives and the mixed second derivative, so a single evaluation of
// F^2 with seeds on (y_i, y_j) yields d^2 F^2 / dy_i dy_j exactly (no step-size
// tuning). Seeding one direction on x and one on y gives the mixed x-y
// derivatives the spray needs.
#pragma once

#include <cmath>
#include <vector>

namespace finsler {

struct HDual {
  double v = 0.0;    // value
  double d1 = 0.0;   // derivative along seed direction 1
  double d2 = 0.0;   // derivative along seed direction 2
  double d12 = 0.0;  // mixed second derivative

  HDual() = default;
  HDual(double value) : v(value) {}  // NOLINT: implicit by design
  HDual(double value, double a, double b, double ab) : v(value), d1(a), d2(b), d12(ab) {}
};

using HVec = std::vector<HDual>;

inline HDual operator+(const HDual& a, const HDual& b) {
  return {a.v + b.v, a.d1 + b.d1, a.d2 + b.d2, a.d12 + b.d12};
}
inline HDual operator-(const HDual& a, const HDual& b) {
  return {a.v - b.v, a.d1 - b.d1, a.d2 - b.d2, a.d12 - b.d12};
}
inline HDual operator-(const HDual& a) { return {-a.v, -a.d1, -a.d2, -a.d12}; }
inline HDual operator*(const HDual& a, const HDual& b) {
  return {a.v * b.v, a.d1 * b.v + a.v * b.d1, a.d2 * b.v + a.v * b.d2,
          a.d12 * b.v + a.d1 * b.d2 + a.d2 * b.d1 + a.v * b.d12};
}

// univariate chain rule: g = f(a) with f(a.v) = f0, f'(a.v) = f1, f''(a.v) = f2
inline HDual lift(const HDual& a, double f0, double f1, double f2) {
  return {f0, f1 * a.d1, f1 * a.d2, f1 * a.d12 + f2 * a.d1 * a.d2};
}

inline HDual inv(const HDual& a) {
  double r = 1.0 / a.v;
  return lift(a, r, -r * r, 2.0 * r * r * r);
}
inline HDual operator/(const HDual& a, const HDual& b) { return a * inv(b); }

inline HDual sqrt(const HDual& a) {
  double s = std::sqrt(a.v);
  return lift(a, s, 0.5 / s, -0.25 / (s * a.v));
}
inline HDual exp(const HDual& a) {
  double e = std::exp(a.v);
  return lift(a, e, e, e);
}
inline HDual log(const HDual& a) { return lift(a, std::log(a.v), 1.0 / a.v, -1.0 / (a.v * a.v)); }
inline HDual sin(const HDual& a) { return lift(a, std::sin(a.v), std::cos(a.v), -std::sin(a.v)); }
inline HDual cos(const HDual& a) { return lift(a, std::cos(a.v), -std::sin(a.v), -std::cos(a.v)); }
inline HDual pow(const HDual& a, double p) {
  double f0 = std::pow(a.v, p);
  return lift(a, f0, p * std::pow(a.v, p - 1.0), p * (p - 1.0) * std::pow(a.v, p - 2.0));
}

// integer power by repeated multiplication (exact for the even powers used by
// p-norm families)
inline HDual ipow(HDual a, int k) {
  HDual r(1.0);
  while (k > 0) {
    if (k & 1) r = r * a;
    a = a * a;
    k >>= 1;
  }
  return r;
}

inline double value(const HDual& a) { return a.v; }
inline double value(double a) { return a; }

inline double ipow(double a, int k) {
  double r = 1.0;
  while (k > 0) {
    if (k & 1) r *= a;
    a *= a;
    k >>= 1;
  }
  return r;
}

}  // namespace finsler
