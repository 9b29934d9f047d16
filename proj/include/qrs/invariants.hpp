#pragma once

// Self-contained property battery for the calibrated map: uniform expansion
// on half-beams, boundary/hyperplane mapping, the two inscribed-ball lemmas,
// round trips and the lattice zeros. Runnable as a library call and behind
// the selftest subcommand; deterministic given the seed.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "qrs/chain.hpp"
#include "qrs/lds.hpp"
#include "qrs/map.hpp"

namespace qrs {

struct CheckResult {
  std::string name;
  long long samples = 0;
  double worst_margin = 0.0;  // >= -tolerance means pass
  bool pass = false;
};

struct SuiteReport {
  std::uint64_t seed = 0;
  MapParams params;
  std::vector<CheckResult> checks;
  bool pass = false;
};

namespace detail {
// Random point of the half-beam T(r, sign) with height in [0, hmax]; lattice
// parts spread over a small window so several beams get exercised.
inline Vec halfbeam_point(const LdsSampler& lds, std::uint64_t i, const MapParams& p, double hmax,
                          BeamIndex* beam_out = nullptr) {
  const int dm1 = p.d - 1;
  Vec x(p.d);
  BeamIndex b;
  b.r.resize(dm1);
  for (int j = 0; j < dm1; ++j) {
    b.r[j] = static_cast<long long>(std::floor(lds.coord(i, 2 * dm1 + j) * 7.0)) - 3;
    x[j] = 2.0 * static_cast<double>(b.r[j]) + lds.sym(i, j) * 0.999;
  }
  b.sign = lds.coord(i, 3 * dm1) < 0.5 ? 1 : -1;
  x[p.d - 1] = b.sign * hmax * lds.coord(i, dm1);
  if (beam_out) *beam_out = b;
  return x;
}
}  // namespace detail

inline CheckResult check_expansion(long long n, std::uint64_t seed, const MapParams& p) {
  LdsSampler lds(seed);
  CheckResult res{"expansion", n, 0.0, false};
  double worst = std::numeric_limits<double>::infinity();
  for (long long i = 1; i <= n; ++i) {
    BeamIndex b;
    Vec a = detail::halfbeam_point(lds, static_cast<std::uint64_t>(i), p,
                                   (i % 5 == 0) ? 6.0 : 2.0, &b);
    Vec c(p.d);
    const int dm1 = p.d - 1;
    if (i % 3 == 0) {
      // near pair along a quasi-random direction
      Vec v = lds_sphere(lds, static_cast<std::uint64_t>(i), p.d);
      double t = 1e-4 + 1e-2 * lds.coord(static_cast<std::uint64_t>(i), 5);
      for (int k = 0; k < p.d; ++k) c[k] = a[k] + t * v[k];
      // clamp back into the same half-beam
      for (int j = 0; j < dm1; ++j) {
        double lo = 2.0 * b.r[j] - 1.0, hi = 2.0 * b.r[j] + 1.0;
        c[j] = std::min(std::max(c[j], lo), hi);
      }
      if (b.sign * c[p.d - 1] < 0.0) c[p.d - 1] = 0.0;
    } else {
      for (int j = 0; j < dm1; ++j)
        c[j] = 2.0 * static_cast<double>(b.r[j]) +
               lds.sym(static_cast<std::uint64_t>(i), 4 + j) * 0.999;
      c[p.d - 1] = b.sign * ((i % 5 == 0) ? 6.0 : 2.0) *
                   lds.coord(static_cast<std::uint64_t>(i), 3 + dm1);
    }
    double dx = dist2(a, c);
    if (dx < 1e-12) continue;
    double dy = dist2(s_eval(a, p), s_eval(c, p));
    worst = std::min(worst, dy / dx);
  }
  res.worst_margin = worst - p.alpha;
  res.pass = res.worst_margin >= -kTolSlack && expansion_ok(p);
  return res;
}

inline CheckResult check_boundary_maps(long long n, std::uint64_t seed, const MapParams& p) {
  LdsSampler lds(seed + 1);
  CheckResult res{"boundary_maps", n, 0.0, false};
  double worst = std::numeric_limits<double>::infinity();
  const int dm1 = p.d - 1;
  for (long long i = 1; i <= n; ++i) {
    std::uint64_t u = static_cast<std::uint64_t>(i);
    Vec x(p.d);
    for (int j = 0; j < dm1; ++j) x[j] = 2.0 * std::floor(lds.coord(u, 4 + j) * 5.0) - 4.0 +
                                         lds.sym(u, j) * 0.999;
    if (i % 2 == 0) {
      // boundary of a half-beam: pin one horizontal coordinate to an odd value
      int j0 = static_cast<int>(i % dm1);
      x[j0] = std::round(x[j0] * 0.5) * 2.0 + (lds.coord(u, 9) < 0.5 ? -1.0 : 1.0);
      x[p.d - 1] = 3.0 * lds.sym(u, dm1);
      Vec y = s_eval(x, p);
      worst = std::min(worst, kTolSlack * p.lambda - std::fabs(y[p.d - 1]));
    } else {
      // hyperplane point: image stays in the hyperplane and inside B(0, lambda)
      x[p.d - 1] = 0.0;
      Vec y = s_eval(x, p);
      worst = std::min(worst, kTolSlack * p.lambda - std::fabs(y[p.d - 1]));
      worst = std::min(worst, p.lambda * (1.0 + kTolAlgebraic) - norm2(y));
    }
  }
  res.worst_margin = worst;
  res.pass = worst >= 0.0;
  return res;
}

inline CheckResult check_ball_lemmas(long long n, std::uint64_t seed, const MapParams& p) {
  LdsSampler lds(seed + 2);
  CheckResult res{"ball_lemmas", n, 0.0, false};
  double worst = std::numeric_limits<double>::infinity();
  const int dm1 = p.d - 1;
  for (long long i = 1; i <= n; ++i) {
    std::uint64_t u = static_cast<std::uint64_t>(i);
    if (i % 2 == 0) {
      // half-beam case of the first lemma
      BeamIndex b;
      Vec x = detail::halfbeam_point(lds, u, p, 1.5, &b);
      BranchSpec br = make_halfbeam_branch(b);
      double slack = dist_to_branch_boundary(x, br);
      if (slack <= 1e-4) continue;
      double t = slack * (0.05 + 0.9 * lds.coord(u, 7));
      CertifiedBall ball{x, t, br, false};
      CertifiedBall img{s_eval(x, p), p.alpha * t, br, false};
      BallChain chain;
      chain.balls = {ball, img};
      chain.steps = {br};
      ChainCheck cc = check_chain(chain, p, 64, kTolSlack, seed + u);
      worst = std::min(worst, cc.worst_slack);
    } else {
      // hyperplane case: growth law min{2t, 1/2} inside a beam
      Vec x(p.d, 0.0);
      std::vector<long long> lat(dm1);
      for (int j = 0; j < dm1; ++j) {
        lat[j] = static_cast<long long>(std::floor(lds.coord(u, 4 + j) * 5.0)) - 2;
        x[j] = 2.0 * static_cast<double>(lat[j]) + lds.sym(u, j) * 0.93;
      }
      BranchSpec br = make_fullbeam_branch(lat);
      double slack = dist_to_branch_boundary(x, br);
      if (slack <= 1e-4) continue;
      double t = slack * (0.05 + 0.9 * lds.coord(u, 7));
      CertifiedBall ball{x, t, br, false};
      CertifiedBall grown = grow_on_h0(ball, p);
      double want = std::min(2.0 * t, 0.5);
      if (std::fabs(grown.radius - want) > kTolAlgebraic) worst = std::min(worst, -1.0);
      if (std::fabs(grown.center[p.d - 1]) > kTolAlgebraic) worst = std::min(worst, -1.0);
      if (dist_to_branch_boundary(grown.center, grown.domain) < grown.radius - kTolAlgebraic)
        worst = std::min(worst, -1.0);
      BallChain chain;
      chain.balls = {ball, grown};
      chain.steps = {br};
      ChainCheck cc = check_chain(chain, p, 64, kTolSlack, seed + u);
      worst = std::min(worst, cc.worst_slack);
    }
  }
  res.worst_margin = worst;
  res.pass = worst >= -kTolSlack;
  return res;
}

inline CheckResult check_roundtrips_and_zeros(long long n, std::uint64_t seed, const MapParams& p) {
  LdsSampler lds(seed + 3);
  CheckResult res{"roundtrips_zeros", n, 0.0, false};
  double worst = std::numeric_limits<double>::infinity();
  const int dm1 = p.d - 1;
  // lattice zeros vanish exactly
  for (long long i = 0; i < 100; ++i) {
    Vec z(p.d, 0.0);
    for (int j = 0; j < dm1; ++j)
      z[j] = 2.0 * (std::floor(lds.coord(static_cast<std::uint64_t>(i + 1), j) * 11.0) - 5.0);
    worst = std::min(worst, kTolAlgebraic * p.lambda - norm2(s_eval(z, p)));
  }
  for (long long i = 1; i <= n; ++i) {
    std::uint64_t u = static_cast<std::uint64_t>(i);
    BeamIndex b;
    Vec x = detail::halfbeam_point(lds, u, p, 4.0, &b);
    // fold/unfold round trip
    FoldData f = fold(x, p);
    Vec x2 = unfold(f, p);
    worst = std::min(worst, kTolAlgebraic - dist2(x, x2) / std::max(1.0, norm2(x)));
    // branch round trip
    Vec y = s_eval(x, p);
    Vec x3 = inverse_branch(y, make_halfbeam_branch(b), p);
    worst = std::min(worst, kTolRoundTrip - dist2(x, x3) / std::max(1.0, norm2(x)));
    // expansion away from the beam's lattice zero
    Vec z(p.d, 0.0);
    for (int j = 0; j < dm1; ++j) z[j] = 2.0 * static_cast<double>(b.r[j]);
    double dz = dist2(x, z);
    if (dz > 1e-12)
      worst = std::min(worst, norm2(y) / dz - (p.alpha - kTolSlack));
  }
  res.worst_margin = worst;
  res.pass = worst >= -kTolSlack;
  return res;
}

inline SuiteReport run_suite(long long n, std::uint64_t seed, const MapParams& p) {
  SuiteReport rep;
  rep.seed = seed;
  rep.params = p;
  rep.checks.push_back(check_expansion(n, seed, p));
  rep.checks.push_back(check_boundary_maps(n, seed, p));
  rep.checks.push_back(check_ball_lemmas(std::max<long long>(n / 100, 100), seed, p));
  rep.checks.push_back(check_roundtrips_and_zeros(std::max<long long>(n / 10, 100), seed, p));
  rep.pass = true;
  for (const CheckResult& c : rep.checks) rep.pass = rep.pass && c.pass;
  return rep;
}

}  // namespace qrs
