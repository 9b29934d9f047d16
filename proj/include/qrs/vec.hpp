#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "qrs/dd.hpp"

namespace qrs {

using Vec = std::vector<double>;
template <class R>
using VecT = std::vector<R>;

template <class R>
R norm2(const VecT<R>& x) {
  R s(0.0);
  for (const R& v : x) s += v * v;
  return num::sqrt(s);
}

template <class R>
R norminf(const VecT<R>& x) {
  R s(0.0);
  for (const R& v : x) {
    R a = num::abs(v);
    if (s < a) s = a;
  }
  return s;
}

template <class R>
R dist2(const VecT<R>& a, const VecT<R>& b) {
  R s(0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    R d = a[i] - b[i];
    s += d * d;
  }
  return num::sqrt(s);
}

template <class R>
VecT<R> vsub(const VecT<R>& a, const VecT<R>& b) {
  VecT<R> r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

template <class R>
VecT<R> vadd(const VecT<R>& a, const VecT<R>& b) {
  VecT<R> r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

template <class R>
VecT<R> vscale(const VecT<R>& a, R s) {
  VecT<R> r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] * s;
  return r;
}

template <class R>
R dot(const VecT<R>& a, const VecT<R>& b) {
  R s(0.0);
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline bool all_finite(const Vec& x) {
  for (double v : x)
    if (!std::isfinite(v)) return false;
  return true;
}

inline Vec to_vec(const VecT<DD>& x) {
  Vec r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) r[i] = to_double(x[i]);
  return r;
}

inline VecT<DD> to_ddvec(const Vec& x) {
  VecT<DD> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) r[i] = DD(x[i]);
  return r;
}

}  // namespace qrs
