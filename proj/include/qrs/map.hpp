#pragma once

// Forward evaluation of S = lambda * F on all of R^d and the exact inverse
// branches on half-beams, adjacent pairs of half-beams, and full beams.
//
// F on the fundamental half-beam [-1,1]^{d-1} x [0,inf): write u for the
// horizontal part and h for the height. For h <= 1 the point (|u|_inf, h) of
// the meridian square maps to (a, b) in the quarter disk and the image is
// a * (u / |u|_2) in the horizontal plane with last coordinate b. For h > 1
// the h = 1 image is scaled by e^{h-1}. The extension to R^d folds through
// reflections; the parity bit decides whether the image is flipped into the
// lower half-space.

#include <cmath>
#include <limits>
#include <utility>

#include "qrs/fold.hpp"
#include "qrs/meridian.hpp"

namespace qrs {

template <class R>
VecT<R> eval_half_beam(const VecT<R>& u, R h, int d) {
  if (static_cast<int>(u.size()) != d - 1) throw domain_error("eval_half_beam: dimension mismatch");
  if (to_double(h) < -kTolAlgebraic) throw domain_error("eval_half_beam: negative height");
  if (to_double(norminf(u)) > 1.0 + 16 * kTolAlgebraic)
    throw domain_error("eval_half_beam: horizontal part outside cube");
  VecT<R> out(d, R(0.0));
  if (h > R(1.0)) {
    VecT<R> base = eval_half_beam(u, R(1.0), d);
    double e = to_double(h) - 1.0;
    if (e > 709.0) {
      // overflow regime: keep zero components exact, saturate the rest
      for (int i = 0; i < d; ++i) {
        double b = to_double(base[i]);
        out[i] = R(b == 0.0 ? 0.0
                            : (b > 0.0 ? std::numeric_limits<double>::infinity()
                                       : -std::numeric_limits<double>::infinity()));
      }
      return out;
    }
    R scale = num::exp(h - R(1.0));
    for (int i = 0; i < d; ++i) out[i] = base[i] * scale;
    return out;
  }
  R s = norminf(u);
  if (to_double(s) == 0.0) {
    out[d - 1] = h < R(0.0) ? R(0.0) : h;
    return out;
  }
  auto [a, b] = meridian_fwd(s, h);
  R n = norm2(u);
  R scale = a / n;
  for (int i = 0; i < d - 1; ++i) out[i] = u[i] * scale;
  out[d - 1] = b;
  return out;
}

// Exact inverse of eval_half_beam on the closed upper half-space.
template <class R>
std::pair<VecT<R>, R> invert_half_beam(const VecT<R>& w) {
  const int d = static_cast<int>(w.size());
  R wd = w[d - 1];
  VecT<R> wp(w.begin(), w.end() - 1);
  R a = norm2(wp);
  double scale = std::max(1.0, to_double(a) + std::fabs(to_double(wd)));
  if (to_double(wd) < -kTolSlack * scale)
    throw branch_domain_error("invert_half_beam: point in the lower half-space");
  if (to_double(wd) < 0.0) wd = R(0.0);
  R nw = num::sqrt(a * a + wd * wd);
  if (to_double(nw) == 0.0) return {VecT<R>(d - 1, R(0.0)), R(0.0)};
  R s, h;
  if (nw <= R(1.0)) {
    auto sh = meridian_inv(a, wd);
    s = sh.first;
    h = sh.second;
  } else {
    h = R(1.0) + num::log(nw);
    s = a / (R(2.0) * wd + a);  // from the arc parametrization at h = 1
  }
  VecT<R> u(d - 1, R(0.0));
  if (to_double(a) > 0.0 && to_double(s) > 0.0) {
    R si = norminf(wp);
    R f = s / si;
    for (int j = 0; j < d - 1; ++j) u[j] = wp[j] * f;
  }
  return {u, h};
}

template <class R>
VecT<R> s_eval(const VecT<R>& x, const MapParams& p) {
  FoldDataT<R> f = fold(x, p);
  VecT<R> w = eval_half_beam(f.u, f.h, p.d);
  R lam(p.lambda);
  for (R& c : w) c = c * lam;
  if (f.parity) w[p.d - 1] = -w[p.d - 1];
  if (to_double(w[p.d - 1]) == 0.0) w[p.d - 1] = R(0.0);  // normalize -0
  return w;
}

namespace detail {
// Inverse of S through one half-beam; the caller guarantees (or asks us to
// check) that y lies in the image half-space of that half-beam.
template <class R>
VecT<R> invert_through_halfbeam(const VecT<R>& y, const BeamIndex& beam, const MapParams& p,
                                bool check_halfspace) {
  const int d = p.d;
  int pi = beam_parity(beam);
  VecT<R> w = y;
  if (pi) w[d - 1] = -w[d - 1];
  R lam(p.lambda);
  for (R& c : w) c = c / lam;
  if (check_halfspace) {
    double scale = std::max(1.0, to_double(norm2(w)));
    if (to_double(w[d - 1]) < -kTolSlack * scale)
      throw branch_domain_error("inverse_branch: point outside the half-beam image");
  }
  auto [u, h] = invert_half_beam(w);
  FoldDataT<R> f;
  f.m = beam.r;
  f.u = std::move(u);
  f.h = h;
  f.parity = pi;
  return unfold(f, p);
}
}  // namespace detail

template <class R>
VecT<R> inverse_branch(const VecT<R>& y, const BranchSpec& br, const MapParams& p) {
  if (static_cast<int>(y.size()) != p.d) throw domain_error("inverse_branch: dimension mismatch");
  for (const R& c : y)
    if (!std::isfinite(to_double(c))) throw domain_error("inverse_branch: non-finite input");
  switch (br.kind) {
    case BranchKind::HalfBeam:
      return detail::invert_through_halfbeam(y, br.primary, p, true);
    case BranchKind::AdjacentPair: {
      double yd = to_double(y[p.d - 1]);
      const BeamIndex* pick = &br.primary;
      if (yd != 0.0) {
        int want = yd > 0.0 ? +1 : -1;
        if (image_halfspace_sign(br.primary) != want) {
          if (image_halfspace_sign(*br.secondary) != want)
            throw branch_domain_error("inverse_branch: pair covers neither half-space");
          pick = &*br.secondary;
        }
      }
      // ties on the invariant hyperplane resolve through the primary beam
      return detail::invert_through_halfbeam(y, *pick, p, false);
    }
    case BranchKind::FullBeam: {
      double yd = to_double(y[p.d - 1]);
      BeamIndex upper{br.primary.r, +1};
      BeamIndex lower{br.primary.r, -1};
      const BeamIndex& pick =
          (yd == 0.0) ? upper
                      : (image_halfspace_sign(upper) == (yd > 0.0 ? +1 : -1) ? upper : lower);
      return detail::invert_through_halfbeam(y, pick, p, false);
    }
  }
  throw domain_error("inverse_branch: bad branch kind");
}

// Allocation-free forward step for hot loops (renderer, orbit scans).
struct EvalScratch {
  std::vector<long long> m;
  Vec u;
};

inline void s_eval_inplace(Vec& x, const MapParams& p, EvalScratch& sc) {
  const int d = p.d;
  const int dm1 = d - 1;
  sc.m.resize(dm1);
  sc.u.resize(dm1);
  long long msum = 0;
  for (int j = 0; j < dm1; ++j) {
    long long m = detail::nearest_cell(x[j] * 0.5, p.tie);
    sc.m[j] = m;
    double u = x[j] - 2.0 * static_cast<double>(m);
    if (m & 1LL) u = -u;
    sc.u[j] = u;
    msum += m;
  }
  bool neg = x[dm1] < 0.0;
  double h = std::fabs(x[dm1]);
  int parity = detail::par_of_sum(msum, neg);

  double s = 0.0, n2 = 0.0;
  for (int j = 0; j < dm1; ++j) {
    double a = std::fabs(sc.u[j]);
    if (a > s) s = a;
    n2 += sc.u[j] * sc.u[j];
  }
  n2 = std::sqrt(n2);

  double hh = std::min(h, 1.0);
  double a, b;
  if (s == 0.0) {
    a = 0.0;
    b = hh;
  } else {
    auto ab = meridian_fwd(s, hh);
    a = ab.first;
    b = ab.second;
  }
  double scale = p.lambda;
  if (h > 1.0) {
    double e = h - 1.0;
    scale = e > 709.0 ? std::numeric_limits<double>::infinity() : p.lambda * std::exp(e);
  }
  double hscale = (s == 0.0) ? 0.0 : a / n2 * scale;
  for (int j = 0; j < dm1; ++j) x[j] = sc.u[j] == 0.0 ? 0.0 : sc.u[j] * hscale;
  double xd = b == 0.0 ? 0.0 : b * scale;
  x[dm1] = parity ? -xd : xd;
  if (x[dm1] == 0.0) x[dm1] = 0.0;  // normalize -0
}

}  // namespace qrs
