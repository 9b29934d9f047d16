#pragma once

// Profile maps behind the half-beam parametrization.
//
// cube_to_ball: radial gauge map of the sup-norm cube onto the Euclidean
// ball (direction preserved, |y|_2 = |x|_inf).
//
// meridian_fwd: two-stage map of the square [0,1]^2 onto the quarter disk.
// Stage 1 opens the corner (1,0): identity below the anti-diagonal,
// (r,h) -> (2r+h-1, 1-r) above it; the union of images is the triangle
// { a,b >= 0, a/2 + b <= 1 }. Stage 2 is the radial gauge map of that
// triangle onto the quarter disk, p -> p * gauge(p)/|p|, gauge(a,b) = a/2+b.
// Boundary correspondence: the h=1 edge goes onto the full arc, the h=0 and
// r=1 edges go into the horizontal radius, the r=0 edge is fixed pointwise.

#include <utility>

#include "qrs/exceptions.hpp"
#include "qrs/params.hpp"
#include "qrs/vec.hpp"

namespace qrs {

template <class R>
VecT<R> cube_to_ball(const VecT<R>& x) {
  R s = norminf(x);
  if (to_double(s) > 1.0 + kTolAlgebraic) throw domain_error("cube_to_ball: input outside cube");
  if (to_double(s) == 0.0) return VecT<R>(x.size(), R(0.0));
  R n = norm2(x);
  return vscale(x, s / n);
}

template <class R>
VecT<R> ball_to_cube(const VecT<R>& y) {
  R n = norm2(y);
  if (to_double(n) > 1.0 + kTolAlgebraic) throw domain_error("ball_to_cube: input outside ball");
  if (to_double(n) == 0.0) return VecT<R>(y.size(), R(0.0));
  R s = norminf(y);
  return vscale(y, n / s);
}

template <class R>
R meridian_gauge(R a, R b) {
  return a * R(0.5) + b;
}

template <class R>
std::pair<R, R> meridian_fwd(R r, R h) {
  double rd = to_double(r), hd = to_double(h);
  if (rd < -kTolAlgebraic || rd > 1.0 + kTolAlgebraic || hd < -kTolAlgebraic ||
      hd > 1.0 + kTolAlgebraic)
    throw domain_error("meridian_fwd: input outside unit square");
  R a, b;
  if (r + h <= R(1.0)) {
    a = r;
    b = h;
  } else {
    a = R(2.0) * r + h - R(1.0);
    b = R(1.0) - r;
  }
  R g = meridian_gauge(a, b);
  if (to_double(g) == 0.0) return {R(0.0), R(0.0)};
  R n = num::sqrt(a * a + b * b);
  R scale = g / n;
  return {a * scale, b * scale};
}

template <class R>
std::pair<R, R> meridian_inv(R a, R b) {
  double ad = to_double(a), bd = to_double(b);
  if (ad < -kTolAlgebraic || bd < -kTolAlgebraic || ad * ad + bd * bd > 1.0 + 16 * kTolAlgebraic)
    throw domain_error("meridian_inv: input outside quarter disk");
  if (ad == 0.0 && bd == 0.0) return {R(0.0), R(0.0)};
  R n = num::sqrt(a * a + b * b);
  R g = meridian_gauge(a, b);
  R pa = a * (n / g);
  R pb = b * (n / g);
  if (pa + pb <= R(1.0)) return {pa, pb};
  return {R(1.0) - pb, pa + R(2.0) * pb - R(1.0)};
}

}  // namespace qrs
