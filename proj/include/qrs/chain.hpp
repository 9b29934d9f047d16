#pragma once

// Certified ball chains: a sequence of balls U_0, ..., U_N with branch tags
// such that U_{j+1} is contained in S(U_j) through the tagged branch. Each
// constructor realizes one inscribed-ball lemma:
//   propagate_ball    B(S(x), alpha t) inside S(B(x, t)) for a ball in a
//                     half-beam,
//   cross_face_step   a ball straddling the face between two adjacent
//                     half-beams once the image no longer fits in one,
//   h0_recenter       a ball centered on the invariant hyperplane inside the
//                     image of a pair ball centered on the shared face,
//   grow_on_h0        radius doubling capped at 1/2 for balls centered on
//                     the hyperplane inside a beam,
//   locate_zero_ball  the unit ball around the nearest lattice zero,
//   tail_chain        the contracting tail back into the start ball.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "qrs/lds.hpp"
#include "qrs/map.hpp"

namespace qrs {

struct CertifiedBall {
  Vec center;
  double radius = 0.0;
  BranchSpec domain;
  // Tail entries denote ball INTERSECTED with the branch domain region; the
  // plain in-domain invariant does not apply to them.
  bool clipped = false;
};

struct BallChain {
  std::vector<CertifiedBall> balls;
  std::vector<BranchSpec> steps;  // steps[j] = branch domain of balls[j]
};

inline CertifiedBall propagate_ball(const CertifiedBall& b, const MapParams& p) {
  Vec y = s_eval(b.center, p);
  double rho = p.alpha * b.radius;
  if (!all_finite(y)) throw step_failure("propagate_ball: image center overflowed");
  HalfBeamFit fit = fit_single_halfbeam(y, rho * (1.0 - 1e-12), p);
  CertifiedBall nb;
  nb.center = std::move(y);
  nb.radius = rho;
  if (fit.fits) {
    nb.domain = make_halfbeam_branch(fit.beam);
    return nb;
  }
  // largest branch domain still containing the ball, if any
  FoldData f = fold(nb.center, p);
  BranchSpec full = make_fullbeam_branch(f.m);
  if (dist_to_branch_boundary(nb.center, full) >= rho * (1.0 - 1e-12)) {
    nb.domain = full;
    return nb;
  }
  throw step_failure("propagate_ball: image ball fits no branch domain");
}

namespace detail {
struct CrossedFace {
  std::size_t j0;     // crossed horizontal coordinate
  double face;        // odd hyperplane position
  long long lat_a;    // lattice cell on the center side
  long long lat_b;    // neighbor cell across the face
  double slack;       // distance from the image center to the face
};

inline CrossedFace most_crossed_face(const Vec& y, const MapParams& p) {
  FoldData f = fold(y, p);
  CrossedFace out{0, 0.0, 0, 0, std::numeric_limits<double>::infinity()};
  const int dm1 = p.d - 1;
  for (int j = 0; j < dm1; ++j) {
    double s = 1.0 - std::fabs(f.u[j]);
    if (s < out.slack) {
      out.slack = s;
      out.j0 = static_cast<std::size_t>(j);
      double side = 0.0;
      // the folded sign of u tracks reflections; recover the geometric side
      double raw = y[j] - 2.0 * static_cast<double>(f.m[j]);
      side = raw >= 0.0 ? 1.0 : -1.0;
      out.face = 2.0 * static_cast<double>(f.m[j]) + side;
      out.lat_a = f.m[j];
      out.lat_b = f.m[j] + (side > 0.0 ? 1 : -1);
    }
  }
  return out;
}

}  // namespace detail

inline CertifiedBall cross_face_step(const CertifiedBall& b, const MapParams& p) {
  Vec y = s_eval(b.center, p);
  if (!all_finite(y)) throw step_failure("cross_face_step: image center overflowed");
  double rho = p.alpha * b.radius;
  if (fit_single_halfbeam(y, rho, p).fits)
    throw domain_error("cross_face_step: image ball still fits one half-beam");
  detail::CrossedFace cf = detail::most_crossed_face(y, p);
  if (cf.slack >= rho) throw step_failure("cross_face_step: no horizontal face crossed");
  int eps = y[p.d - 1] >= 0.0 ? +1 : -1;
  FoldData fy = fold(y, p);

  Vec q0 = y;
  q0[cf.j0] = cf.face;
  // nudge target: face center in the bounded coordinates, comfortably away
  // from the hyperplane vertically
  Vec tgt = q0;
  for (int j = 0; j < p.d - 1; ++j)
    if (static_cast<std::size_t>(j) != cf.j0) tgt[j] = 2.0 * static_cast<double>(fy.m[j]);
  tgt[p.d - 1] = eps * std::max(std::fabs(y[p.d - 1]), 1.0);

  auto union_slack = [&](const Vec& q) {
    double dist = 2.0 - std::fabs(q[cf.j0] - cf.face);
    for (int j = 0; j < p.d - 1; ++j) {
      if (static_cast<std::size_t>(j) == cf.j0) continue;
      double s = 1.0 - std::fabs(q[j] - 2.0 * static_cast<double>(fy.m[j]));
      dist = std::min(dist, s);
    }
    double v = eps > 0 ? q[p.d - 1] : -q[p.d - 1];
    return std::min(dist, v);
  };

  const double thetas[] = {0.0, 0.25, 0.125, 0.0625, 0.03125, 0.015625};
  CertifiedBall best;
  best.radius = -1.0;
  for (double th : thetas) {
    Vec q(p.d);
    for (int i = 0; i < p.d; ++i) q[i] = q0[i] + th * (tgt[i] - q0[i]);
    q[cf.j0] = cf.face;  // stay exactly on the face
    double budget = rho - dist2(q, y);
    double r = std::min({budget, union_slack(q), 1.0}) * (1.0 - 1e-6);
    if (r > best.radius) {
      best.center = q;
      best.radius = r;
    }
  }
  if (best.radius < 1e-9) throw step_failure("cross_face_step: no admissible radius after nudging");
  BeamIndex a{fy.m, eps};
  BeamIndex bb = a;
  bb.r[cf.j0] = cf.lat_b;
  best.domain = make_pair_branch(a, bb);
  return best;
}

namespace detail {
// Square-with-vertex construction shared by the hyperplane steps: the
// axis-aligned square with one vertex at x, side 2*delta, oriented into the
// beam of x; returns the square center (a hyperplane point).
inline Vec square_center_into_beam(const Vec& x, double delta, const MapParams& p,
                                   std::vector<long long>& beam_out) {
  FoldData f = fold(x, p);
  beam_out = f.m;
  Vec c(p.d, 0.0);
  for (int j = 0; j < p.d - 1; ++j) {
    double cell = 2.0 * static_cast<double>(f.m[j]);
    double dir = x[j] <= cell ? 1.0 : -1.0;
    c[j] = x[j] + dir * delta;
  }
  c[p.d - 1] = 0.0;
  return c;
}
}  // namespace detail

inline CertifiedBall h0_recenter(const CertifiedBall& b, const MapParams& p) {
  if (b.domain.kind != BranchKind::AdjacentPair)
    throw domain_error("h0_recenter: ball must carry an AdjacentPair domain");
  Vec x = s_eval(b.center, p);
  // the center sits on a shared face, so its image lies in the hyperplane
  if (std::fabs(x[p.d - 1]) > kTolSlack * p.lambda)
    throw domain_error("h0_recenter: image center not on the invariant hyperplane");
  x[p.d - 1] = 0.0;
  double rho = p.alpha * b.radius;
  double delta = std::min(rho / (2.0 * std::sqrt(static_cast<double>(p.d - 1))), 0.5);
  std::vector<long long> beam;
  Vec c = detail::square_center_into_beam(x, delta, p, beam);
  CertifiedBall nb;
  nb.center = std::move(c);
  nb.radius = delta;
  nb.domain = make_fullbeam_branch(beam);
  return nb;
}

inline CertifiedBall grow_on_h0(const CertifiedBall& b, const MapParams& p) {
  if (b.domain.kind != BranchKind::FullBeam)
    throw domain_error("grow_on_h0: ball must carry a FullBeam domain");
  if (std::fabs(b.center[p.d - 1]) > kTolAlgebraic)
    throw domain_error("grow_on_h0: center must lie in the invariant hyperplane");
  Vec x = s_eval(b.center, p);
  x[p.d - 1] = 0.0;  // exact by construction, clear rounding dust
  double delta = std::min(2.0 * b.radius, 0.5);
  std::vector<long long> beam;
  Vec c = detail::square_center_into_beam(x, delta, p, beam);
  CertifiedBall nb;
  nb.center = std::move(c);
  nb.radius = delta;
  nb.domain = make_fullbeam_branch(beam);
  return nb;
}

inline CertifiedBall locate_zero_ball(const CertifiedBall& b, const MapParams& p) {
  if (std::fabs(b.radius - 0.5) > kTolAlgebraic)
    throw domain_error("locate_zero_ball: ball radius must be 1/2");
  if (std::fabs(b.center[p.d - 1]) > kTolAlgebraic)
    throw domain_error("locate_zero_ball: center must lie in the invariant hyperplane");
  Vec x = s_eval(b.center, p);
  Vec z(p.d, 0.0);
  std::vector<long long> lattice(p.d - 1);
  for (int j = 0; j < p.d - 1; ++j) {
    lattice[j] = detail::nearest_cell(x[j] * 0.5, p.tie);
    z[j] = 2.0 * static_cast<double>(lattice[j]);
  }
  CertifiedBall nb;
  nb.center = std::move(z);
  nb.radius = 1.0;
  nb.domain = make_fullbeam_branch(lattice);
  return nb;
}

struct TailChain {
  long long N = 0;
  std::vector<CertifiedBall> balls;  // clipped entries, indices m+2 .. N
  std::vector<BranchSpec> steps;     // steps m+1 .. N-1
};

// U_j = B(0, alpha^{j-m-1}) clipped to the fundamental half-beam for
// j >= m+2; N is the smallest index whose ball swallows the closure of U0.
inline TailChain tail_chain(const CertifiedBall& u0, long long m, const MapParams& p) {
  BranchSpec t0 = make_halfbeam_branch(BeamIndex{std::vector<long long>(p.d - 1, 0), +1});
  if (dist_to_branch_boundary(u0.center, t0) < u0.radius + 1e-9)
    throw domain_error("tail_chain: start ball not strictly inside the fundamental half-beam");
  double maxnorm = norm2(u0.center) + u0.radius;
  long long k = 1;
  while (std::pow(p.alpha, static_cast<double>(k)) <= maxnorm) ++k;
  TailChain tc;
  tc.N = m + 1 + k;
  for (long long j = m + 2; j <= tc.N; ++j) {
    CertifiedBall cb;
    cb.center = Vec(p.d, 0.0);
    cb.radius = std::pow(p.alpha, static_cast<double>(j - m - 1));
    cb.domain = t0;
    cb.clipped = true;
    tc.balls.push_back(std::move(cb));
  }
  for (long long j = m + 2; j < tc.N; ++j) tc.steps.push_back(t0);
  return tc;
}

// --- chain soundness check: sampled boundary pullbacks ---

struct ChainCheck {
  bool ok = true;
  double worst_slack = std::numeric_limits<double>::infinity();
  std::string detail;
};

// 64 boundary points of a chain entry. For clipped (tail) entries the
// spherical boundary is sampled over the half-beam cross-section.
inline std::vector<Vec> chain_boundary_samples(const CertifiedBall& b, const MapParams& p,
                                               int count, std::uint64_t seed) {
  LdsSampler lds(seed);
  std::vector<Vec> out;
  out.reserve(count);
  if (!b.clipped) {
    for (int i = 0; i < count; ++i) {
      Vec v = lds_sphere(lds, static_cast<std::uint64_t>(i) + 1, p.d);
      Vec y(p.d);
      for (int k = 0; k < p.d; ++k) y[k] = b.center[k] + b.radius * v[k];
      out.push_back(std::move(y));
    }
    return out;
  }
  for (int i = 0; i < count; ++i) {
    Vec y(p.d);
    double n2 = 0.0;
    for (int j = 0; j < p.d - 1; ++j) {
      y[j] = 0.999 * lds.sym(static_cast<std::uint64_t>(i) + 1, static_cast<unsigned>(j));
      n2 += y[j] * y[j];
    }
    double rr = b.radius * b.radius - n2;
    y[p.d - 1] = rr > 0.0 ? std::sqrt(rr) : 0.0;
    out.push_back(std::move(y));
  }
  return out;
}

inline ChainCheck check_chain(const BallChain& chain, const MapParams& p, int samples = 64,
                              double slack = kTolSlack, std::uint64_t seed = 7) {
  ChainCheck res;
  for (std::size_t j = 0; j + 1 < chain.balls.size(); ++j) {
    const CertifiedBall& from = chain.balls[j + 1];
    const CertifiedBall& into = chain.balls[j];
    const BranchSpec& br = chain.steps[j];
    auto pts = chain_boundary_samples(from, p, samples, seed + j);
    for (const Vec& y : pts) {
      Vec x = inverse_branch(y, br, p);
      double margin = into.radius + slack - dist2(x, into.center);
      if (into.clipped) {
        BranchSpec t0 = make_halfbeam_branch(BeamIndex{std::vector<long long>(p.d - 1, 0), +1});
        margin = std::min(margin, dist_to_branch_boundary(x, t0) + slack);
      }
      res.worst_slack = std::min(res.worst_slack, margin);
      if (margin < 0.0) {
        res.ok = false;
        res.detail = "pullback escaped ball " + std::to_string(j);
      }
    }
  }
  return res;
}

}  // namespace qrs
