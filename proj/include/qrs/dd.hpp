#pragma once

// Double-double scalar: an unevaluated sum of two doubles giving ~31
// significant digits. The certificate verification paths pull points back
// through long branch chains and push them forward again; each forward step
// multiplies rounding error by the local expansion, so plain doubles run out
// of headroom. Algorithms follow the classic error-free transformations
// (two_sum / fma-based two_prod).

#include <cmath>
#include <cstdint>
#include <limits>

namespace qrs {

struct DD {
  double hi = 0.0;
  double lo = 0.0;
  constexpr DD() = default;
  constexpr DD(double h) : hi(h), lo(0.0) {}
  constexpr DD(double h, double l) : hi(h), lo(l) {}
};

namespace detail {
inline DD two_sum(double a, double b) {
  double s = a + b;
  double bb = s - a;
  return {s, (a - (s - bb)) + (b - bb)};
}
// requires |a| >= |b|
inline DD quick_two_sum(double a, double b) {
  double s = a + b;
  return {s, b - (s - a)};
}
inline DD two_prod(double a, double b) {
  double p = a * b;
  return {p, std::fma(a, b, -p)};
}
}  // namespace detail

inline DD operator+(DD a, DD b) {
  DD s = detail::two_sum(a.hi, b.hi);
  DD t = detail::two_sum(a.lo, b.lo);
  s.lo += t.hi;
  s = detail::quick_two_sum(s.hi, s.lo);
  s.lo += t.lo;
  return detail::quick_two_sum(s.hi, s.lo);
}
inline DD operator-(DD a) { return {-a.hi, -a.lo}; }
inline DD operator-(DD a, DD b) { return a + (-b); }
inline DD operator*(DD a, DD b) {
  DD p = detail::two_prod(a.hi, b.hi);
  p.lo += a.hi * b.lo + a.lo * b.hi;
  return detail::quick_two_sum(p.hi, p.lo);
}
inline DD operator/(DD a, DD b) {
  double q1 = a.hi / b.hi;
  DD r = a - b * DD(q1);
  double q2 = r.hi / b.hi;
  r = r - b * DD(q2);
  double q3 = r.hi / b.hi;
  DD q = detail::quick_two_sum(q1, q2);
  return q + DD(q3);
}

inline DD& operator+=(DD& a, DD b) { a = a + b; return a; }
inline DD& operator-=(DD& a, DD b) { a = a - b; return a; }
inline DD& operator*=(DD& a, DD b) { a = a * b; return a; }
inline DD& operator/=(DD& a, DD b) { a = a / b; return a; }

inline bool operator<(DD a, DD b) { return a.hi < b.hi || (a.hi == b.hi && a.lo < b.lo); }
inline bool operator>(DD a, DD b) { return b < a; }
inline bool operator<=(DD a, DD b) { return !(b < a); }
inline bool operator>=(DD a, DD b) { return !(a < b); }
inline bool operator==(DD a, DD b) { return a.hi == b.hi && a.lo == b.lo; }
inline bool operator!=(DD a, DD b) { return !(a == b); }

inline double to_double(DD a) { return a.hi + a.lo; }
inline double to_double(double a) { return a; }

inline DD dd_abs(DD a) { return a.hi < 0.0 || (a.hi == 0.0 && a.lo < 0.0) ? -a : a; }
inline DD dd_ldexp(DD a, int k) { return {std::ldexp(a.hi, k), std::ldexp(a.lo, k)}; }

inline DD dd_floor(DD a) {
  double f = std::floor(a.hi);
  if (f == a.hi) {
    // hi is integral; lo decides which side of the integer we are on
    if (a.lo < 0.0) f -= 1.0;
    return {f, 0.0};
  }
  return {f, 0.0};
}

inline DD dd_sqrt(DD a) {
  if (a.hi <= 0.0) return {0.0, 0.0};
  double y0 = std::sqrt(a.hi);
  DD y(y0);
  y = dd_ldexp(y + a / y, -1);
  y = dd_ldexp(y + a / y, -1);
  return y;
}

inline DD dd_exp(DD a) {
  if (a.hi > 709.0) return {std::numeric_limits<double>::infinity(), 0.0};
  if (a.hi < -709.0) return {0.0, 0.0};
  static const DD kLn2{6.931471805599452862e-01, 2.319046813846299558e-17};
  double m = std::floor(a.hi / 0.6931471805599453 + 0.5);
  DD r = a - kLn2 * DD(m);
  r = dd_ldexp(r, -9);  // |r| <= ln2/2 / 512
  DD sum(0.0), term(1.0);
  for (int k = 1; k <= 14; ++k) {
    term = term * r / DD(static_cast<double>(k));
    sum += term;
  }
  // e^r = 1 + sum; undo the scaling by repeated squaring of (1+s)
  DD f = DD(1.0) + sum;
  for (int i = 0; i < 9; ++i) f = f * f;
  return dd_ldexp(f, static_cast<int>(m));
}

inline DD dd_log(DD a) {
  if (a.hi <= 0.0) return {-std::numeric_limits<double>::infinity(), 0.0};
  double y0 = std::log(a.hi);
  DD e = dd_exp(DD(y0));
  DD r = a / e - DD(1.0);
  DD r2 = r * r;
  return DD(y0) + r - dd_ldexp(r2, -1) + r2 * r / DD(3.0);
}

// Generic scalar shims so the geometric kernels can be instantiated with
// either double or DD.
namespace num {
inline double sqrt(double x) { return std::sqrt(x); }
inline double exp(double x) { return std::exp(x); }
inline double log(double x) { return std::log(x); }
inline double abs(double x) { return std::fabs(x); }
inline double floor(double x) { return std::floor(x); }
inline DD sqrt(DD x) { return dd_sqrt(x); }
inline DD exp(DD x) { return dd_exp(x); }
inline DD log(DD x) { return dd_log(x); }
inline DD abs(DD x) { return dd_abs(x); }
inline DD floor(DD x) { return dd_floor(x); }
}  // namespace num

}  // namespace qrs
