#pragma once

// Reduction of R^d to the fundamental half-beam by reflections, plus the
// half-beam / beam indexing and branch-domain geometry used everywhere else.
// A half-beam T(r, sign) is { |x_j - 2 r_j| <= 1 (j < d-1), sign * x_d >= 0 }.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qrs/exceptions.hpp"
#include "qrs/params.hpp"
#include "qrs/vec.hpp"

namespace qrs {

struct BeamIndex {
  std::vector<long long> r;  // lattice part, length d-1
  int sign = +1;             // +1 upper half-beam, -1 lower
};

inline bool operator==(const BeamIndex& a, const BeamIndex& b) {
  return a.sign == b.sign && a.r == b.r;
}
inline bool operator!=(const BeamIndex& a, const BeamIndex& b) { return !(a == b); }

template <class R>
struct FoldDataT {
  std::vector<long long> m;  // beam index per horizontal coordinate
  VecT<R> u;                 // reflected local coordinates, |u_j| <= 1
  R h{0.0};                  // |x_d|
  int parity = 0;            // 0 => image in upper half-space
};
using FoldData = FoldDataT<double>;

namespace detail {
template <class R>
long long nearest_cell(R q, FoldTie tie) {
  R f = num::floor(q);
  double fd = to_double(f);
  if (!(fd > -4.0e15 && fd < 4.0e15)) throw domain_error("fold: coordinate magnitude too large");
  long long base = static_cast<long long>(fd);
  R frac = q - f;
  if (frac > R(0.5)) return base + 1;
  if (frac < R(0.5)) return base;
  return tie == FoldTie::TowardEvenLower ? base : base + 1;
}
inline int par_of_sum(long long msum, bool neg) {
  return static_cast<int>((msum & 1LL) ^ (neg ? 1LL : 0LL));
}
}  // namespace detail

template <class R>
FoldDataT<R> fold(const VecT<R>& x, const MapParams& p) {
  if (static_cast<int>(x.size()) != p.d) throw domain_error("fold: dimension mismatch");
  for (const R& c : x)
    if (!std::isfinite(to_double(c))) throw domain_error("fold: non-finite input");
  const int dm1 = p.d - 1;
  FoldDataT<R> f;
  f.m.resize(dm1);
  f.u.resize(dm1);
  long long msum = 0;
  for (int j = 0; j < dm1; ++j) {
    long long m = detail::nearest_cell(x[j] * R(0.5), p.tie);
    f.m[j] = m;
    R u = x[j] - R(2.0 * static_cast<double>(m));
    if (m & 1LL) u = -u;
    f.u[j] = u;
    msum += m;
  }
  bool neg = x[p.d - 1] < R(0.0);
  f.h = num::abs(x[p.d - 1]);
  f.parity = detail::par_of_sum(msum, neg);
  return f;
}

template <class R>
VecT<R> unfold(const FoldDataT<R>& f, const MapParams& p) {
  const int dm1 = p.d - 1;
  if (static_cast<int>(f.m.size()) != dm1 || static_cast<int>(f.u.size()) != dm1)
    throw domain_error("unfold: dimension mismatch");
  if (f.h < R(0.0)) throw domain_error("unfold: negative height");
  VecT<R> x(p.d);
  long long msum = 0;
  for (int j = 0; j < dm1; ++j) {
    if (to_double(num::abs(f.u[j])) > 1.0 + kTolAlgebraic)
      throw domain_error("unfold: |u_j| exceeds 1");
    R u = f.u[j];
    if (f.m[j] & 1LL) u = -u;
    x[j] = R(2.0 * static_cast<double>(f.m[j])) + u;
    msum += f.m[j];
  }
  bool neg = detail::par_of_sum(msum, false) != f.parity;
  x[p.d - 1] = neg ? -f.h : f.h;
  return x;
}

inline BeamIndex halfbeam_of(const Vec& x, const MapParams& p) {
  FoldData f = fold(x, p);
  return BeamIndex{f.m, x[p.d - 1] < 0.0 ? -1 : +1};
}

// Parity of a half-beam: which closed half-space its image is.
inline int beam_parity(const BeamIndex& b) {
  long long s = 0;
  for (long long r : b.r) s += r;
  return detail::par_of_sum(s, b.sign < 0);
}
// +1 if the half-beam maps onto {x_d >= 0}, else -1.
inline int image_halfspace_sign(const BeamIndex& b) { return beam_parity(b) == 0 ? +1 : -1; }

enum class BranchKind { HalfBeam, AdjacentPair, FullBeam };

struct BranchSpec {
  BranchKind kind = BranchKind::HalfBeam;
  BeamIndex primary;
  std::optional<BeamIndex> secondary;  // present iff kind == AdjacentPair
};

inline BranchSpec make_halfbeam_branch(BeamIndex b) {
  return BranchSpec{BranchKind::HalfBeam, std::move(b), std::nullopt};
}
inline BranchSpec make_fullbeam_branch(std::vector<long long> lattice) {
  return BranchSpec{BranchKind::FullBeam, BeamIndex{std::move(lattice), +1}, std::nullopt};
}

inline bool beams_adjacent(const BeamIndex& a, const BeamIndex& b) {
  if (a.r.size() != b.r.size()) return false;
  if (a.sign == b.sign) {
    int diffs = 0;
    for (std::size_t j = 0; j < a.r.size(); ++j) {
      long long d = a.r[j] - b.r[j];
      if (d == 0) continue;
      if (d != 1 && d != -1) return false;
      ++diffs;
    }
    return diffs == 1;
  }
  return a.r == b.r;
}

inline BranchSpec make_pair_branch(BeamIndex primary, BeamIndex secondary) {
  if (!beams_adjacent(primary, secondary))
    throw domain_error("BranchSpec: beams of an AdjacentPair must share exactly one face");
  return BranchSpec{BranchKind::AdjacentPair, std::move(primary), std::move(secondary)};
}

// Minimum slack of c to the boundary of the branch domain; negative outside.
// B(c, t) is inside the domain iff the returned value >= t.
inline double dist_to_branch_boundary(const Vec& c, const BranchSpec& br) {
  const std::size_t dm1 = br.primary.r.size();
  const double cd = c[dm1];
  double dist = std::numeric_limits<double>::infinity();
  auto cube_slack = [&](const std::vector<long long>& r, std::size_t skip) {
    for (std::size_t j = 0; j < dm1; ++j) {
      if (j == skip) continue;
      double s = 1.0 - std::fabs(c[j] - 2.0 * static_cast<double>(r[j]));
      if (s < dist) dist = s;
    }
  };
  switch (br.kind) {
    case BranchKind::HalfBeam: {
      cube_slack(br.primary.r, dm1 + 1);
      double v = br.primary.sign > 0 ? cd : -cd;
      if (v < dist) dist = v;
      break;
    }
    case BranchKind::FullBeam: {
      cube_slack(br.primary.r, dm1 + 1);
      break;
    }
    case BranchKind::AdjacentPair: {
      const BeamIndex& a = br.primary;
      const BeamIndex& b = *br.secondary;
      if (a.sign == b.sign) {
        // side-face pair: union spans two lattice cells in one coordinate
        std::size_t j0 = dm1;
        for (std::size_t j = 0; j < dm1; ++j)
          if (a.r[j] != b.r[j]) j0 = j;
        cube_slack(a.r, j0);
        double face = static_cast<double>(a.r[j0] + b.r[j0]);  // 2*min+1 == 2*max-1
        double s = 2.0 - std::fabs(c[j0] - face);
        if (s < dist) dist = s;
        double v = a.sign > 0 ? cd : -cd;
        if (v < dist) dist = v;
      } else {
        // opposite-sign pair: union is the full beam
        cube_slack(a.r, dm1 + 1);
      }
      break;
    }
  }
  return dist;
}

// Whether B(c, rho) fits inside some single closed half-beam; if so, which.
struct HalfBeamFit {
  bool fits = false;
  BeamIndex beam;
};

inline HalfBeamFit fit_single_halfbeam(const Vec& c, double rho, const MapParams& p) {
  HalfBeamFit out;
  const int dm1 = p.d - 1;
  double cd = c[p.d - 1];
  if (std::fabs(cd) < rho) return out;
  FoldData f = fold(c, p);
  for (int j = 0; j < dm1; ++j)
    if (1.0 - std::fabs(f.u[j]) < rho) return out;  // too close to an odd hyperplane
  out.fits = true;
  out.beam = BeamIndex{f.m, cd < 0.0 ? -1 : +1};
  return out;
}

}  // namespace qrs
