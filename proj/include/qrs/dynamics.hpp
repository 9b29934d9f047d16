#pragma once

// Orbits, escape classification, the constructive periodic-point search and
// the blow-up certifier.
//
// The chain construction follows the inscribed-ball route: propagate while
// the image ball fits a single half-beam, cross the first violated face into
// an adjacent pair, recenter on the invariant hyperplane, grow to radius 1/2,
// jump to the nearest lattice zero, then close with the contracting tail.
//
// Feasibility note: image heights iterate like h -> lambda * e^{h-1}, so a
// chain whose centers wander to height H needs ~e^{-H} coordinate resolution
// one step later. Doubles therefore only support chains whose centers keep
// modest heights. The seed search below picks the start ball's center so
// that the whole forward prefix of the chain threads low-height corridors
// (near the face skeleton, whose image hugs the invariant hyperplane), and
// plants a deliberate face crossing where phase A is supposed to end.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qrs/chain.hpp"
#include "qrs/calibration.hpp"
#include "qrs/lds.hpp"

#ifndef QRS_SEED_TRACE
#define QRS_SEED_TRACE(...) \
  do {                      \
  } while (0)
#endif

namespace qrs {

inline constexpr double kCoordCap = 1e12;   // chain centers must fold exactly
inline constexpr double kBandHi = 1.45;     // preferred orbit height band
inline constexpr double kBandHard = 16.5;   // representability ceiling for orbit heights

struct OrbitResult {
  std::vector<Vec> points;
  bool overflowed = false;
};

inline OrbitResult orbit(const Vec& x0, long long kmax, double bailout, const MapParams& p) {
  if (kmax < 1) throw domain_error("orbit: kmax must be >= 1");
  if (!all_finite(x0)) throw domain_error("orbit: non-finite start");
  OrbitResult r;
  r.points.push_back(x0);
  Vec x = x0;
  EvalScratch sc;
  for (long long k = 0; k < kmax; ++k) {
    if (norm2(x) > bailout) break;
    s_eval_inplace(x, p, sc);
    if (!all_finite(x)) {
      r.overflowed = true;
      break;
    }
    r.points.push_back(x);
  }
  return r;
}

enum class EscapeClass { EscapedHeuristic, BoundedSoFar };

inline EscapeClass classify_escape(const Vec& x0, long long kmax, double bailout,
                                   const MapParams& p) {
  if (bailout < 10.0 * p.lambda)
    throw domain_error("classify_escape: bailout must be at least 10*lambda");
  Vec x = x0;
  EvalScratch sc;
  for (long long k = 0; k <= kmax; ++k) {
    double n = 0.0;
    for (double c : x) n += c * c;
    if (!(n <= bailout * bailout)) return EscapeClass::EscapedHeuristic;  // also catches inf
    if (k == kmax) break;
    s_eval_inplace(x, p, sc);
  }
  return EscapeClass::BoundedSoFar;
}

struct PeriodicPointResult {
  Vec point;
  long long period = 0;
  double backward_residual = 0.0;
  double forward_residual = 0.0;
  BallChain chain;
};

struct BlowupSample {
  Vec y;
  Vec x;
  double error = 0.0;
};

struct BlowupCertificate {
  long long k = 0;
  long long m = 0;
  BallChain chain;  // phases A-D, up to the unit ball around the lattice zero
  std::vector<BlowupSample> samples;
  double max_error = 0.0;
};

struct ProbeResult {
  PeriodicPointResult periodic;  // point lies in the queried ball
  Vec seed_point;                // the chain-level point; S^e maps it onto .periodic.point
  int push_steps = 0;            // e above
  std::optional<Vec> escape_proxy;
};

// ---------------------------------------------------------------------------
// seed search
// ---------------------------------------------------------------------------

namespace detail {

inline bool orbit_prefix(const Vec& c0, int levels, const MapParams& p, std::vector<Vec>& pts) {
  pts.clear();
  pts.push_back(c0);
  Vec x = c0;
  EvalScratch sc;
  for (int i = 0; i < levels; ++i) {
    if (norminf(x) > kCoordCap) return false;
    s_eval_inplace(x, p, sc);
    if (!all_finite(x) || norminf(x) > kCoordCap) return false;
    pts.push_back(x);
  }
  return true;
}

inline double face_dist(const Vec& y, const MapParams& p) {
  FoldData f = fold(y, p);
  double m = std::numeric_limits<double>::infinity();
  for (double u : f.u) m = std::min(m, 1.0 - std::fabs(u));
  return m;
}

inline double halfbeam_slack(const Vec& y, const MapParams& p) {
  return std::min(face_dist(y, p), std::fabs(y[p.d - 1]));
}

inline bool prefix_tame(const std::vector<Vec>& pts, int upto, const MapParams& p) {
  for (int i = 1; i <= upto && i < static_cast<int>(pts.size()); ++i)
    if (std::fabs(pts[i][p.d - 1]) > kBandHard) return false;
  return true;
}

struct SeedPlan {
  bool ok = false;
  Vec c0;
  double t0 = 0.0;
  int cross_level = 0;
  std::string note;
};

// Level-wise corridor threading. The orbit height at level L drops to zero
// exactly where the level-(L-1) image crosses the face skeleton (odd
// hyperplanes map into the invariant hyperplane), and those crossings are
// zeros of SIGNED image coordinates, so they can be located by bisection.
// Each level is steered in two moves: bisect a signed crossing to
// manufacture a near-zero bracket end, then bisect the level functional
// (orbit height, or face distance for the planted phase-A crossing) into its
// target interval along that segment.
class SeedSearch {
 public:
  SeedSearch(const Vec& center, double radius, const MapParams& p, std::uint64_t salt)
      : center_(center), radius_(radius), p_(p), salt_(salt), lds_(1234567 + salt * 77) {}

  SeedPlan run(bool early_cross, double pessimism, double cross_gate = 24e-9) {
    SeedPlan plan;
    Vec c = center_;
    if (salt_ > 0) {  // decorrelate retry starting points
      Vec v = lds_sphere(lds_, 17 + salt_, p_.d);
      for (int k = 0; k < p_.d; ++k) c[k] += 0.35 * radius_ * v[k];
    }
    double box = radius_ * 0.9995;
    const int max_levels = 30;
    for (int L = 0; L < max_levels; ++L) {
      if (!ensure_band(c, box, L + 1)) {
        QRS_SEED_TRACE("L=%d ensure_band failed\n", L);
        return plan;
      }
      std::vector<Vec> pts;
      if (!orbit_prefix(c, L + 1, p_, pts)) return plan;
      double t0 = compute_t0(c, pts, L + 1);
      if (t0 < 1e-14 * std::max(1.0, radius_)) {
        QRS_SEED_TRACE("L=%d t0 collapsed (%g)\n", L, t0);
        return plan;
      }
      double rho_next = std::pow(p_.alpha, static_cast<double>(L + 2)) * t0;
      double rho_pess = rho_next / pessimism;
      bool attempt = early_cross ? rho_pess > cross_gate : rho_pess > 0.05;
      if (!attempt && L + 3 >= max_levels) attempt = rho_pess > 64.0 * 1e-9;
      QRS_SEED_TRACE("L=%d h=%g t0=%g rho_pess=%g attempt=%d\n", L,
                     std::fabs(pts[L + 1][p_.d - 1]), t0, rho_pess, (int)attempt);
      if (!attempt) continue;
      Vec c_try = c;
      double box_try = box;
      if (!plant_crossing(c_try, box_try, L + 2, rho_pess)) {
        QRS_SEED_TRACE("L=%d plant failed\n", L);
        continue;
      }
      std::vector<Vec> v;
      if (!orbit_prefix(c_try, L + 2, p_, v) || !prefix_tame(v, L + 1, p_)) continue;
      double t0f = compute_t0(c_try, v, L + 1);
      double rho = std::pow(p_.alpha, static_cast<double>(L + 2)) * t0f;
      double fd = face_dist(v[L + 2], p_);
      QRS_SEED_TRACE("L=%d planted: t0f=%g rho=%g fd=%g h=%g\n", L, t0f, rho, fd,
                     std::fabs(v[L + 2][p_.d - 1]));
      if (t0f > 1e-14 && fd < 0.45 * rho && std::fabs(v[L + 2][p_.d - 1]) < kBandHard) {
        plan.ok = true;
        plan.c0 = c_try;
        plan.t0 = t0f;
        plan.cross_level = L + 2;
        return plan;
      }
    }
    return plan;
  }

 private:
  double compute_t0(const Vec& c, const std::vector<Vec>& pts, int upto) const {
    double t = (radius_ - dist2(c, center_)) * 0.9;
    double apow = 1.0;
    for (int i = 0; i <= upto && i < static_cast<int>(pts.size()); ++i) {
      t = std::min(t, 0.8 * halfbeam_slack(pts[i], p_) / apow);
      apow *= p_.alpha;
    }
    return t;
  }

  bool in_ball(const Vec& q) const { return dist2(q, center_) <= radius_ * 0.9995; }

  // height of the level-lvl orbit point; NaN if the prefix up to tame_upto
  // leaves the representable band or the orbit overflows
  double height_at(const Vec& q, int lvl, int tame_upto, std::vector<Vec>& scratch) const {
    if (!orbit_prefix(q, lvl, p_, scratch)) return std::numeric_limits<double>::quiet_NaN();
    if (!prefix_tame(scratch, tame_upto, p_)) return std::numeric_limits<double>::quiet_NaN();
    return std::fabs(scratch[lvl][p_.d - 1]);
  }

  double facedist_at(const Vec& q, int lvl, double height_cap, std::vector<Vec>& scratch) const {
    if (!orbit_prefix(q, lvl, p_, scratch)) return std::numeric_limits<double>::quiet_NaN();
    if (!prefix_tame(scratch, lvl - 1, p_)) return std::numeric_limits<double>::quiet_NaN();
    if (std::fabs(scratch[lvl][p_.d - 1]) > height_cap)
      return std::numeric_limits<double>::quiet_NaN();
    return face_dist(scratch[lvl], p_);
  }

  // Locate q near c (within box) whose level-lvl image sits exactly on the
  // face skeleton: bisect the sign of one image coordinate against an odd
  // integer (or the last coordinate against zero). `far` returns the same-
  // segment endpoint away from the crossing.
  bool bisect_crossing(const Vec& c, double box, int lvl, double height_cap, Vec& on_face,
                       Vec& far) {
    // level-zero probes are free (no orbit evaluation), so hunt harder there
    const int kProbes = lvl == 0 ? 4096 : 288;
    struct Cand {
      Vec q;
      Vec img;
    };
    std::vector<Cand> cands;
    auto admit = [&](const Vec& q) -> bool {
      std::vector<Vec> pts;
      if (!orbit_prefix(q, lvl, p_, pts) || !prefix_tame(pts, lvl - 1, p_)) return false;
      if (std::fabs(pts[lvl][p_.d - 1]) > height_cap) return false;
      cands.push_back({q, pts[lvl]});
      return true;
    };
    admit(c);
    for (int i = 0; i < kProbes; ++i) {
      Vec q(p_.d);
      for (int k = 0; k < p_.d; ++k)
        q[k] = c[k] + box * lds_.sym(probe_counter_ + i, static_cast<unsigned>(k));
      if (!in_ball(q)) continue;
      admit(q);
    }
    probe_counter_ += kProbes;
    if (cands.size() < 2) return false;
    // find a coordinate and a wall value straddled by two candidates;
    // walls are odd integers horizontally and zero vertically
    for (int j = 0; j < p_.d; ++j) {
      for (std::size_t aa = 0; aa < cands.size(); ++aa) {
        for (std::size_t bb = aa + 1; bb < cands.size(); ++bb) {
          double va = cands[aa].img[j];
          double vb = cands[bb].img[j];
          double lo = std::min(va, vb), hi = std::max(va, vb);
          double wall;
          if (j == p_.d - 1) {
            if (!(lo < 0.0 && hi > 0.0)) continue;
            wall = 0.0;
          } else {
            double mid = 0.5 * (lo + hi);
            wall = 2.0 * std::floor((mid - 1.0) * 0.5) + 1.0;  // odd value nearest below mid
            if (wall <= lo) wall += 2.0;
            if (!(wall > lo && wall < hi)) continue;
          }
          // the image of the whole segment may sweep several walls; scan for
          // an adjacent valid pair with a local sign change and bisect there
          const int kScan = 72;
          Vec prev;
          double fprev = std::numeric_limits<double>::quiet_NaN();
          Vec a, b;
          double fa = std::numeric_limits<double>::quiet_NaN();
          bool have = false;
          for (int t = 0; t <= kScan && !have; ++t) {
            Vec q(p_.d);
            double w = static_cast<double>(t) / kScan;
            for (int k = 0; k < p_.d; ++k)
              q[k] = (1.0 - w) * cands[aa].q[k] + w * cands[bb].q[k];
            std::vector<Vec> pts;
            double fq = std::numeric_limits<double>::quiet_NaN();
            if (orbit_prefix(q, lvl, p_, pts) && prefix_tame(pts, lvl - 1, p_) &&
                std::fabs(pts[lvl][p_.d - 1]) <= 1.5 * height_cap)
              fq = pts[lvl][j] - wall;
            if (!std::isnan(fq) && !std::isnan(fprev) && (fq < 0.0) != (fprev < 0.0)) {
              a = prev;
              fa = fprev;
              b = q;
              have = true;
            }
            prev = q;
            fprev = fq;
          }
          if (!have) continue;
          for (int it = 0; it < 110; ++it) {
            Vec m(p_.d);
            for (int k = 0; k < p_.d; ++k) m[k] = 0.5 * (a[k] + b[k]);
            std::vector<Vec> pts;
            if (!orbit_prefix(m, lvl, p_, pts) || !prefix_tame(pts, lvl - 1, p_) ||
                std::fabs(pts[lvl][p_.d - 1]) > 1.5 * height_cap) {
              b = m;  // retreat toward the known-valid side
              continue;
            }
            double fm = pts[lvl][j] - wall;
            if ((fm < 0.0) == (fa < 0.0))
              a = m;
            else
              b = m;
          }
          on_face = a;
          far = cands[aa].q;
          return true;
        }
      }
    }
    return false;
  }

  // Bisect a level functional into [lo, hi] along the segment [zero_end, far]
  // where f(zero_end) < lo <= hi < f(far) (approximately).
  template <class F>
  bool bisect_into(const Vec& zero_end, const Vec& far, F f, double lo, double hi, Vec& out,
                   double* scale_out = nullptr) {
    Vec a = zero_end, b = far;
    double fa = f(a);
    if (!std::isnan(fa) && fa >= lo && fa <= hi) {
      out = a;
      if (scale_out) *scale_out = dist2(a, b);
      return true;
    }
    double fb = f(b);
    if (!std::isnan(fb) && fb >= lo && fb <= hi) {
      out = b;
      if (scale_out) *scale_out = dist2(a, b);
      return true;
    }
    if (std::isnan(fa) || fa > hi) return false;
    double target = std::sqrt(std::max(lo, 1e-300) * hi);  // geometric middle
    for (int it = 0; it < 120; ++it) {
      Vec m(p_.d);
      for (int k = 0; k < p_.d; ++k) m[k] = 0.5 * (a[k] + b[k]);
      double fm = f(m);
      if (std::isnan(fm) || fm > target)
        b = m;
      else {
        if (fm >= lo && fm <= hi) {
          out = m;
          if (scale_out) *scale_out = dist2(a, b);
          return true;
        }
        a = m;
      }
    }
    return false;
  }

  // After a corridor tuning, the next search box must match the corridor's
  // own width, or every later probe misses the admissible set.
  double next_box(double box, double scale) const {
    double nb = std::min(box * 0.3, std::max(scale * 16.0, 1e-13 * radius_));
    return std::max(nb, 1e-14 * radius_);
  }

  // Blind probe: look for a box point whose level height already falls in
  // [lo, hi]; workable whenever the admissible slab is wide.
  bool blind_probe(Vec& c, double& box, int lvl, double lo, double hi) {
    std::vector<Vec> scratch;
    const int kProbes = 224;
    bool found = false;
    Vec best;
    double best_score = std::numeric_limits<double>::infinity();
    for (int i = 0; i < kProbes; ++i) {
      Vec q(p_.d);
      for (int k = 0; k < p_.d; ++k)
        q[k] = c[k] + box * lds_.sym(probe_counter_ + i, static_cast<unsigned>(k));
      if (!in_ball(q)) continue;
      double h = height_at(q, lvl, lvl - 1, scratch);
      if (std::isnan(h) || h < lo || h > hi) continue;
      double score = std::fabs(std::log(std::max(h, 1e-300) / 0.8));
      if (score < best_score) {
        best_score = score;
        best = q;
        found = true;
      }
    }
    probe_counter_ += kProbes;
    if (!found) return false;
    c = best;
    box *= 0.5;
    return true;
  }

  // Greedy descent on the level height for joint tuning when no single
  // wall crossing is reachable.
  bool descend_height(Vec& c, double& box, int lvl, double target_hi) {
    std::vector<Vec> scratch;
    const int kProbes = 192;
    for (double start_box : {box, radius_ * 0.98}) {
      double best = height_at(c, lvl, lvl - 1, scratch);
      if (std::isnan(best)) best = std::numeric_limits<double>::infinity();
      Vec bc = c;
      double bbox = start_box;
      for (int round = 0; round < 6 && best > target_hi; ++round) {
        bool improved = false;
        for (int i = 0; i < kProbes; ++i) {
          Vec q(p_.d);
          for (int k = 0; k < p_.d; ++k)
            q[k] = bc[k] + bbox * lds_.sym(probe_counter_ + i, static_cast<unsigned>(k));
          if (!in_ball(q)) continue;
          double h = height_at(q, lvl, lvl - 1, scratch);
          if (!std::isnan(h) && h < best) {
            best = h;
            bc = q;
            improved = true;
          }
        }
        probe_counter_ += kProbes;
        if (improved) bbox *= 0.45;
      }
      if (best <= target_hi) {
        c = bc;
        box = bbox * 0.5;
        return true;
      }
    }
    return false;
  }

  // Bring the orbit height at level lvl into a workable band. Prefers the
  // in-band corridor; otherwise keeps the point still and accepts a ladder
  // level below the representability cap, to preserve search room.
  bool ensure_band(Vec& c, double& box, int lvl) {
    std::vector<Vec> scratch;
    double h = height_at(c, lvl, lvl - 1, scratch);
    if (std::isnan(h)) return false;
    if (h <= kBandHi) return true;
    Vec on_face, far;
    if (bisect_crossing(c, box, lvl - 1, std::numeric_limits<double>::infinity(), on_face, far)) {
      auto f = [&](const Vec& q) { return height_at(q, lvl, lvl - 1, scratch); };
      Vec out;
      double scale = box;
      if (bisect_into(on_face, far, f, 0.05, kBandHi, out, &scale)) {
        c = out;
        box = next_box(box, scale);
        return true;
      }
    }
    if (h <= kBandHard * 0.97) return true;  // ladder level, no move needed
    if (blind_probe(c, box, lvl, 0.02, kBandHard * 0.97)) return true;
    return descend_height(c, box, lvl, kBandHard * 0.97);
  }

  // Plant the phase-A crossing at level lvl: modest height, then park the
  // orbit point deep inside a face corridor.
  bool plant_crossing(Vec& c, double& box, int lvl, double rho_pess) {
    std::vector<Vec> scratch;
    double h = height_at(c, lvl, lvl - 1, scratch);
    if (std::isnan(h)) {
      QRS_SEED_TRACE("  plant lvl=%d: height NaN\n", lvl);
      return false;
    }
    if (h > 4.0 && blind_probe(c, box, lvl, 0.05, 4.0))
      h = height_at(c, lvl, lvl - 1, scratch);
    if (h > 8.0) {
      bool fixed = false;
      Vec on_face, far;
      double cbox = box;
      bool have = bisect_crossing(c, cbox, lvl - 1, std::numeric_limits<double>::infinity(),
                                  on_face, far);
      if (!have && lvl <= 4) {
        cbox = radius_ * 0.98;
        have = bisect_crossing(c, cbox, lvl - 1, std::numeric_limits<double>::infinity(), on_face,
                               far);
      }
      if (have) {
        auto f = [&](const Vec& q) { return height_at(q, lvl, lvl - 1, scratch); };
        Vec out;
        double scale = box;
        if (bisect_into(on_face, far, f, 0.05, 4.0, out, &scale)) {
          c = out;
          box = next_box(box, scale);
          fixed = true;
        }
      }
      if (!fixed && !descend_height(c, box, lvl, 8.0)) {
        QRS_SEED_TRACE("  plant lvl=%d: crossing height stuck (h=%g)\n", lvl, h);
        return false;
      }
    }
    Vec on_face, far;
    if (!bisect_crossing(c, box, lvl, 9.0, on_face, far)) {
      QRS_SEED_TRACE("  plant lvl=%d: no crossing at lvl\n", lvl);
      return false;
    }
    double fd_hi = 0.35 * rho_pess;
    double fd_lo = std::min(1e-11, 1e-3 * rho_pess);
    auto f = [&](const Vec& q) { return facedist_at(q, lvl, 14.0, scratch); };
    // walk dyadically outward from the exact crossing: the face distance is
    // monotone within the first cell, so quadrupling steps cannot overshoot
    // an interval several orders wide
    double fa = f(on_face);
    if (!std::isnan(fa) && fa < fd_hi) {
      Vec best;
      bool found = false;
      if (fa >= fd_lo) {
        best = on_face;
        found = true;
      }
      for (double t = std::pow(2.0, -60); t <= 1.0 && !found; t *= 4.0) {
        Vec q(p_.d);
        for (int k = 0; k < p_.d; ++k) q[k] = on_face[k] + t * (far[k] - on_face[k]);
        double fq = f(q);
        if (std::isnan(fq)) break;
        if (fq >= fd_lo && fq <= fd_hi) {
          best = q;
          found = true;
        }
        if (fq > fd_hi) break;
      }
      if (!found && fa <= 8.0 * fd_hi) {
        // resolution floor of the crossing bisection; still several times
        // deeper than the worst-case firing need, so use it as-is
        best = on_face;
        found = true;
      }
      if (found) {
        c = best;
        box = next_box(box, dist2(on_face, far) * 1e-12 + box * 1e-9);
        return true;
      }
    }
    QRS_SEED_TRACE("  plant lvl=%d: fd walk failed into [%g, %g] (fa=%g)\n", lvl, fd_lo, fd_hi,
                   fa);
    return false;
  }

  Vec center_;
  double radius_;
  const MapParams& p_;
  std::uint64_t salt_ = 0;
  mutable LdsSampler lds_;
  std::uint64_t probe_counter_ = 1;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// chain assembly
// ---------------------------------------------------------------------------

namespace detail {
struct ZeroChain {
  BallChain chain;     // U_0 .. U_{M}, last ball = B(z, 1)
  long long m = 0;     // U_{m+1} is the zero ball, m = M-1
};

inline ZeroChain build_chain_to_zero(CertifiedBall u0, const MapParams& p) {
  ZeroChain zc;
  zc.chain.balls.push_back(std::move(u0));
  int retries = 0;
  int guard = 0;
  for (;;) {
    if (++guard > 400) throw algorithm_error("chain: phase A did not terminate");
    CertifiedBall& b = zc.chain.balls.back();
    Vec y = s_eval(b.center, p);
    if (!all_finite(y) || norminf(y) > kCoordCap) {
      if (++retries > 10)
        throw algorithm_error("chain: image coordinates left the representable range");
      b.radius *= 0.5;
      continue;
    }
    double rho = p.alpha * b.radius;
    if (fit_single_halfbeam(y, rho * (1.0 - 1e-12), p).fits) {
      zc.chain.steps.push_back(b.domain);
      zc.chain.balls.push_back(propagate_ball(b, p));
      continue;
    }
    try {
      CertifiedBall pairball = cross_face_step(b, p);
      CertifiedBall h0ball = h0_recenter(pairball, p);
      zc.chain.steps.push_back(b.domain);
      zc.chain.balls.push_back(std::move(pairball));
      zc.chain.steps.push_back(zc.chain.balls.back().domain);
      zc.chain.balls.push_back(std::move(h0ball));
      break;
    } catch (const step_failure&) {
      if (++retries > 10) throw algorithm_error("chain: cross-face step failed after 10 retries");
      b.radius *= 0.5;
    }
  }
  while (zc.chain.balls.back().radius < 0.5) {
    if (zc.chain.balls.size() > 600) throw algorithm_error("chain: hyperplane growth stalled");
    const CertifiedBall& b = zc.chain.balls.back();
    zc.chain.steps.push_back(b.domain);
    zc.chain.balls.push_back(grow_on_h0(b, p));
  }
  {
    const CertifiedBall& b = zc.chain.balls.back();
    zc.chain.steps.push_back(b.domain);
    zc.chain.balls.push_back(locate_zero_ball(b, p));
  }
  zc.m = static_cast<long long>(zc.chain.balls.size()) - 2;
  return zc;
}

inline Vec apply_inverse_chain(const BallChain& chain, const Vec& start, const MapParams& p) {
  Vec v = start;
  for (std::size_t j = chain.steps.size(); j-- > 0;) v = inverse_branch(v, chain.steps[j], p);
  return v;
}

inline VecT<DD> apply_inverse_chain_dd(const BallChain& chain, const VecT<DD>& start,
                                       const MapParams& p) {
  VecT<DD> v = start;
  for (std::size_t j = chain.steps.size(); j-- > 0;) v = inverse_branch(v, chain.steps[j], p);
  return v;
}

// Forward residual of an N-cycle representative. A double representative
// sits ~1e-16 off the true cycle and that deviation grows by the local
// expansion every step, so the residual is evaluated in double-double on a
// double-double refinement of the fixed point; this reports the cycle's own
// residual instead of overflow artifacts of the rounded point.
inline double forward_residual_dd(const VecT<DD>& pt, long long period, const MapParams& p) {
  VecT<DD> fw = pt;
  try {
    for (long long k = 0; k < period; ++k) {
      fw = s_eval(fw, p);
      bool finite = true;
      for (const DD& c : fw)
        if (!std::isfinite(c.hi)) finite = false;
      if (!finite) return std::numeric_limits<double>::infinity();
    }
  } catch (const domain_error&) {
    return std::numeric_limits<double>::infinity();
  }
  DD e2(0.0);
  for (std::size_t i = 0; i < fw.size(); ++i) {
    DD d = fw[i] - pt[i];
    e2 += d * d;
  }
  return to_double(dd_sqrt(e2));
}
}  // namespace detail

inline PeriodicPointResult find_periodic(const Vec& center, double radius, const MapParams& p,
                                         double tol = 1e-12) {
  require_valid(p);
  if (!(radius > 0.0) || !all_finite(center)) throw domain_error("find_periodic: bad ball");
  BranchSpec t0br = make_halfbeam_branch(BeamIndex{std::vector<long long>(p.d - 1, 0), +1});
  if (dist_to_branch_boundary(center, t0br) < radius + 1e-9)
    throw domain_error("find_periodic: ball must be compactly inside the fundamental half-beam");

  detail::SeedPlan plan;
  for (std::uint64_t salt = 0; salt < 6 && !plan.ok; ++salt) {
    try {
      plan = detail::SeedSearch(center, radius, p, salt).run(true, 1.0);
    } catch (const domain_error&) {
      plan.ok = false;
    }
  }
  if (!plan.ok)
    throw algorithm_error("find_periodic: no tame chain seed found inside the ball");

  CertifiedBall u0;
  u0.center = plan.c0;
  u0.radius = plan.t0;
  u0.domain = make_halfbeam_branch(halfbeam_of(plan.c0, p));
  detail::ZeroChain zc = detail::build_chain_to_zero(u0, p);

  BallChain full = zc.chain;
  TailChain tail = tail_chain(full.balls.front(), zc.m, p);
  full.steps.push_back(full.balls.back().domain);  // zero ball -> first tail set
  for (auto& s : tail.steps) full.steps.push_back(s);
  for (auto& b : tail.balls) full.balls.push_back(b);

  PeriodicPointResult res;
  res.period = tail.N;
  Vec x = full.balls.front().center;
  bool converged = false;
  for (int it = 0; it < 10000; ++it) {
    Vec nx = detail::apply_inverse_chain(full, x, p);
    double step = dist2(nx, x);
    x = std::move(nx);
    if (step < tol) {
      converged = true;
      break;
    }
  }
  if (!converged) throw numerical_error("find_periodic: contraction iteration did not converge");
  res.backward_residual = dist2(detail::apply_inverse_chain(full, x, p), x);
  VecT<DD> xdd = to_ddvec(x);
  for (int it = 0; it < 3; ++it) xdd = detail::apply_inverse_chain_dd(full, xdd, p);
  res.point = to_vec(xdd);
  res.forward_residual = detail::forward_residual_dd(xdd, res.period, p);
  res.chain = std::move(full);

  ChainCheck cc = check_chain(res.chain, p);
  if (!cc.ok) throw numerical_error("find_periodic: chain failed its pullback certificate: " + cc.detail);
  return res;
}

// ---------------------------------------------------------------------------
// pulled start balls (any target ball -> ball in int T_0 with S^e image inside)
// ---------------------------------------------------------------------------

namespace detail {
struct PulledStart {
  CertifiedBall u0;
  int e = 0;  // forward steps from u0 into the target ball
};

inline double local_lipschitz(const Vec& x, const MapParams& p) {
  double L = 0.0;
  Vec q = x;
  for (int probe = 0; probe < 3; ++probe) {
    Mat j = jacobian_fd(q, 1e-7 * std::max(1.0, norminf(q)), p);
    bool finite = true;
    for (double v : j)
      if (!std::isfinite(v)) finite = false;
    if (finite) L = std::max(L, singular_bounds(j, p.d).norm);
    for (int k = 0; k < p.d; ++k) q[k] = x[k] + (probe + 1) * 3e-5 * ((k + probe) % 2 ? 1 : -1);
  }
  return p.lambda * std::max(L, 0.5);
}

inline PulledStart make_start_ball(const Vec& c, double r, const MapParams& p, bool early_cross,
                                   std::uint64_t salt, double extra_shrink,
                                   double cross_gate = 24e-9) {
  BranchSpec t0br = make_halfbeam_branch(BeamIndex{std::vector<long long>(p.d - 1, 0), +1});
  // a target ball reaching into the fundamental half-beam needs no pullback,
  // hence no pessimism over a pullback radius shrink
  bool direct_possible = dist_to_branch_boundary(c, t0br) > 1e-5;
  if (direct_possible) {
    SeedPlan dplan;
    try {
      dplan = SeedSearch(c, r, p, salt).run(early_cross, 1.0, cross_gate * 3e4);
    } catch (const domain_error&) {
      dplan.ok = false;
    }
    if (dplan.ok && dist_to_branch_boundary(dplan.c0, t0br) > 1e-6 + dplan.t0) {
      PulledStart ps;
      ps.u0.center = dplan.c0;
      ps.u0.radius = dplan.t0;
      ps.u0.domain = t0br;
      ps.e = 0;
      return ps;
    }
  }
  // pessimism covers the two-pull radius shrink so the planted crossing in
  // the seed still fires with the final, smaller start radius; measure the
  // local two-step Lipschitz at the ball center rather than assuming the
  // global worst case
  double pessimism = 3e4;
  try {
    Vec probe = c;
    if (std::fabs(probe[p.d - 1]) < 1e-3) probe[p.d - 1] = 1e-3;
    std::vector<long long> lat1(p.d - 1, 0);
    if (probe[p.d - 1] < 0.0) lat1[0] = 1;
    Vec x1c = inverse_branch(probe, make_halfbeam_branch(BeamIndex{lat1, +1}), p);
    Vec x2c = inverse_branch(x1c, t0br, p);
    double est = local_lipschitz(x1c, p) * local_lipschitz(x2c, p) * 1.7 * 3.0;
    pessimism = std::min(3e4, std::max(200.0, est));
  } catch (const std::exception&) {
  }
  SeedPlan plan;
  try {
    plan = SeedSearch(c, r, p, salt).run(early_cross, pessimism * extra_shrink, cross_gate);
  } catch (const domain_error&) {
    plan.ok = false;
  }
  if (!plan.ok) throw algorithm_error("make_start_ball: no tame seed in the target ball");

  // the pessimistic seed can also land inside the half-beam
  if (dist_to_branch_boundary(plan.c0, t0br) > 1e-6 + plan.t0) {
    PulledStart ps;
    ps.u0.center = plan.c0;
    ps.u0.radius = plan.t0;
    ps.u0.domain = t0br;
    ps.e = 0;
    return ps;
  }

  const Vec& yt = plan.c0;
  double ytd = yt[p.d - 1];
  if (std::fabs(ytd) < 1e-9)
    throw algorithm_error("make_start_ball: tame target hugs the invariant hyperplane");
  double rho1 = std::min({(r - dist2(yt, c)) * 0.9, 0.45 * std::fabs(ytd), 0.25 * r});
  if (rho1 <= 0.0) throw algorithm_error("make_start_ball: no room for the pulled ball");

  // first pull lands in an upper half-beam whose image half-space contains yt
  std::vector<long long> lat1(p.d - 1, 0);
  if (ytd < 0.0) lat1[0] = 1;  // odd lattice sum -> image is the lower half-space
  Vec x1 = inverse_branch(yt, make_halfbeam_branch(BeamIndex{lat1, +1}), p);
  Vec x2 = inverse_branch(x1, t0br, p);

  double L1 = local_lipschitz(x1, p);
  double L2 = local_lipschitz(x2, p);
  double rho2 = rho1 / (L1 * L2 * 1.7) / extra_shrink;
  rho2 = std::min(rho2, plan.t0 / (p.alpha * p.alpha));
  rho2 = std::min(rho2, 0.8 * halfbeam_slack(x1, p) / p.alpha);
  rho2 = std::min(rho2, 0.45 * dist_to_branch_boundary(x2, t0br));
  if (rho2 < 1e-13) throw algorithm_error("make_start_ball: pulled radius collapsed");

  // sampled validation of S^2(U0) inside the target ball
  LdsSampler lds(4242 + salt);
  for (int tries = 0; tries < 8; ++tries) {
    bool ok = true;
    for (int i = 0; i < 16 && ok; ++i) {
      Vec v = lds_sphere(lds, static_cast<std::uint64_t>(i) + 1, p.d);
      Vec q(p.d);
      for (int k = 0; k < p.d; ++k) q[k] = x2[k] + rho2 * v[k];
      Vec im = s_eval(s_eval(q, p), p);
      if (!all_finite(im) || dist2(im, c) > r * (1.0 - 1e-9)) ok = false;
    }
    if (ok) break;
    rho2 *= 0.4;
    if (tries == 7 || rho2 < 1e-13)
      throw algorithm_error("make_start_ball: two-step image containment failed");
  }

  PulledStart ps;
  ps.u0.center = x2;
  ps.u0.radius = rho2;
  ps.u0.domain = t0br;
  ps.e = 2;
  return ps;
}
}  // namespace detail

inline ProbeResult probe_density(const Vec& c, double r, long long budget, const MapParams& p,
                                 long long kmax = 100, double bailout = 1e6,
                                 std::uint64_t seed = 0) {
  if (budget < 0) throw domain_error("probe_density: negative budget");
  ProbeResult out;
  bool found = false;
  bool found_clean = false;
  std::string last;
  for (std::uint64_t attempt = 0; attempt < 8 && !found_clean; ++attempt) {
    try {
      detail::PulledStart ps =
          detail::make_start_ball(c, r, p, true, attempt, 1.0 + attempt * 2.0);
      PeriodicPointResult inner =
          find_periodic(ps.u0.center, ps.u0.radius, p);
      // re-refine in extended precision before pushing forward; the pushed
      // point inherits the cycle's shadowing budget
      VecT<DD> qdd = to_ddvec(inner.point);
      for (int it = 0; it < 2; ++it) qdd = detail::apply_inverse_chain_dd(inner.chain, qdd, p);
      for (int e = 0; e < ps.e; ++e) qdd = s_eval(qdd, p);
      Vec q = to_vec(qdd);
      if (dist2(q, c) > r * (1.0 - 1e-9)) {
        last = "pushed point left the target ball";
        continue;
      }
      double fwd = detail::forward_residual_dd(qdd, inner.period, p);
      // a long chain can outrun the extended-precision shadowing budget;
      // keep the best certificate but retry for a shorter chain
      bool clean = fwd < tol_fwd(p, inner.period);
      if (!found || clean ||
          (std::isfinite(fwd) && !std::isfinite(out.periodic.forward_residual))) {
        out.seed_point = inner.point;
        out.push_steps = ps.e;
        out.periodic = inner;
        out.periodic.point = q;
        out.periodic.forward_residual = fwd;
        found = true;
        found_clean = clean;
      }
    } catch (const algorithm_error& e) {
      last = e.what();
    } catch (const numerical_error& e) {
      last = e.what();
    }
  }
  if (!found) throw algorithm_error("probe_density: " + (last.empty() ? "no chain" : last));

  LdsSampler lds(99 + seed);
  for (long long i = 0; i < budget; ++i) {
    Vec v = lds_sphere(lds, static_cast<std::uint64_t>(i) + 1, p.d);
    double t = std::pow(lds.coord(static_cast<std::uint64_t>(i) + 1, 9), 1.0 / p.d);
    Vec q(p.d);
    for (int k = 0; k < p.d; ++k) q[k] = c[k] + r * t * v[k];
    if (classify_escape(q, kmax, bailout, p) == EscapeClass::EscapedHeuristic) {
      out.escape_proxy = q;
      break;
    }
  }
  return out;
}

inline BlowupCertificate certify_blowup(const Vec& c, double r, double R, const MapParams& p,
                                        int nsamples = 100) {
  if (!(R > 0.0)) throw domain_error("certify_blowup: R must be positive");
  std::string last;
  BlowupCertificate best;
  bool have_best = false;
  const double gates[] = {3e-6, 3e-7, 24e-9, 3e-6, 3e-7, 24e-9, 3e-5, 24e-9};
  for (std::uint64_t attempt = 0; attempt < 8; ++attempt) {
    try {
      detail::PulledStart ps = detail::make_start_ball(c, r, p, true, attempt,
                                                       1.0 + attempt * 2.0, gates[attempt]);
      detail::ZeroChain zc = detail::build_chain_to_zero(ps.u0, p);
      long long M0 = static_cast<long long>(zc.chain.balls.size()) - 1;
      long long m = M0 + 1 - ps.e;
      double ratio = std::max(R, p.alpha) / p.alpha;
      long long cext = static_cast<long long>(std::ceil(std::log(ratio) / std::log(p.alpha)));
      if (std::pow(p.alpha, static_cast<double>(cext)) < ratio) ++cext;  // guard fp edge
      long long k = m + 1 + cext;

      BranchSpec beam0 = make_fullbeam_branch(std::vector<long long>(p.d - 1, 0));
      BranchSpec beamz = zc.chain.balls.back().domain;

      BlowupCertificate cert;
      cert.k = k;
      cert.m = m;
      cert.chain = zc.chain;
      Sobol sob(p.d + 1, 31 + attempt);
      double worst = 0.0;
      bool ok = true;
      for (int i = 0; i < nsamples && ok; ++i) {
        Vec y = sobol_ball_point(sob, Vec(p.d, 0.0), R);
        double err = std::numeric_limits<double>::infinity();
        Vec x(p.d, 0.0);
        try {
          VecT<DD> v = to_ddvec(y);
          for (long long t = 0; t < cext + 1; ++t) v = inverse_branch(v, beam0, p);
          v = inverse_branch(v, beamz, p);
          for (std::size_t j = zc.chain.steps.size(); j-- > 0;)
            v = inverse_branch(v, zc.chain.steps[j], p);
          for (int e = 0; e < ps.e; ++e) v = s_eval(v, p);
          x = to_vec(v);
          if (dist2(x, c) > r * (1.0 - 1e-9)) {
            ok = false;
            last = "pullback sample left the source ball";
            break;
          }
          VecT<DD> fw = v;
          bool finite = true;
          for (long long t = 0; t < k && finite; ++t) {
            fw = s_eval(fw, p);
            for (const DD& cc : fw)
              if (!std::isfinite(cc.hi)) finite = false;
          }
          if (finite) {
            DD err2(0.0);
            for (int kk = 0; kk < p.d; ++kk) {
              DD dd = fw[kk] - DD(y[kk]);
              err2 += dd * dd;
            }
            err = to_double(dd_sqrt(err2)) / std::max(1.0, norm2(y));
          }
        } catch (const domain_error&) {
          err = std::numeric_limits<double>::infinity();
        } catch (const branch_domain_error&) {
          err = std::numeric_limits<double>::infinity();
        }
        worst = std::max(worst, err);
        cert.samples.push_back(BlowupSample{y, x, err});
      }
      if (!ok) continue;
      cert.max_error = worst;
      if (!have_best || cert.max_error < best.max_error) {
        best = cert;
        have_best = true;
      }
      if (best.max_error < 1e-7) return best;
    } catch (const algorithm_error& e) {
      last = e.what();
    } catch (const numerical_error& e) {
      last = e.what();
    }
  }
  if (have_best) return best;
  throw algorithm_error("certify_blowup: " + (last.empty() ? "no chain" : last));
}

}  // namespace qrs
