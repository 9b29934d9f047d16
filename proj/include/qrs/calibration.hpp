#pragma once

// Calibration of the expansion floor. beta is estimated as the minimum of
// ell(DF) over a low-discrepancy sample of the fundamental half-beam, lambda
// is chosen so that alpha = lambda * beta clears margin * 4 sqrt(d-1), and
// the distortion maxima K, K' are reported as sampled diagnostics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "qrs/lds.hpp"
#include "qrs/map.hpp"
#include "qrs/svd.hpp"

namespace qrs {

struct CalibrationReport {
  int d = 0;
  double margin = 0.0;
  long long n = 0;
  std::uint64_t seed = 0;
  double beta_est = 0.0;
  double lambda = 0.0;
  double alpha = 0.0;
  double K_hat = 0.0;
  double K_prime_hat = 0.0;
  double dfnorm_max = 0.0;
};

inline constexpr double kFdStep = 1e-6;

// Central finite-difference Jacobian of the unscaled F (lambda = 1).
inline Mat jacobian_fd(const Vec& x, double step, const MapParams& p) {
  MapParams q = unit_lambda(p);
  const int d = p.d;
  Mat jac(d * d, 0.0);
  Vec xp = x, xm = x;
  for (int j = 0; j < d; ++j) {
    xp[j] = x[j] + step;
    xm[j] = x[j] - step;
    Vec fp = s_eval(xp, q);
    Vec fm = s_eval(xm, q);
    for (int i = 0; i < d; ++i) jac[i * d + j] = (fp[i] - fm[i]) / (2.0 * step);
    xp[j] = x[j];
    xm[j] = x[j];
  }
  return jac;
}

// Accept only points farther than 2*step from every non-smooth seam: fold
// seams (odd hyperplanes, the invariant hyperplane), the meridian piece
// seams (r + h = 1, h = 1) and the sup-norm kinks (u_j = 0, |u_i| = |u_j|).
inline bool fd_point_acceptable(const Vec& x, double step, const MapParams& p) {
  const double lim = 2.0 * step;
  FoldData f = fold(x, p);
  if (f.h < lim || std::fabs(f.h - 1.0) < lim) return false;
  double s = norminf(f.u);
  if (std::fabs(s + std::min(f.h, 1.0) - 1.0) < 2.0 * lim) return false;
  const int dm1 = p.d - 1;
  for (int j = 0; j < dm1; ++j) {
    double a = std::fabs(f.u[j]);
    if (a < lim || 1.0 - a < lim) return false;
    for (int k = j + 1; k < dm1; ++k)
      if (std::fabs(a - std::fabs(f.u[k])) < lim) return false;
  }
  return true;
}

namespace detail {
struct DerivativeStats {
  double beta = 0.0;
  double dfmax = 0.0;
  double k_hat = 0.0;
  double k_prime_hat = 0.0;
  std::vector<Vec> low_points;  // sample points realizing the smallest ell values
};

// One pass over n accepted quasi-random samples of the fundamental half-beam
// (h in [0,3]; every fourth sample pushed near a seam so the piecewise limits
// are represented). Deterministic in (seed, n) and prefix-stable: the first n
// accepted samples of a longer run coincide with a shorter run's samples.
inline DerivativeStats derivative_stats(long long n, std::uint64_t seed, const MapParams& p) {
  if (n < 1) throw domain_error("derivative sampling: n must be positive");
  LdsSampler lds(seed);
  const int dm1 = p.d - 1;
  DerivativeStats st;
  st.beta = std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, Vec>> low;
  long long accepted = 0;
  std::uint64_t i = 0;
  Vec x(p.d);
  while (accepted < n) {
    ++i;
    for (int j = 0; j < dm1; ++j) x[j] = 0.9995 * lds.sym(i, static_cast<unsigned>(j));
    x[p.d - 1] = 3.0 * lds.coord(i, static_cast<unsigned>(dm1));
    switch (i % 4) {
      case 1: {  // hug the meridian anti-diagonal seam
        double s = norminf(Vec(x.begin(), x.end() - 1));
        if (s < 0.98) x[p.d - 1] = 1.0 - s + (lds.coord(i, dm1 + 1) - 0.5) * 2e-4;
        break;
      }
      case 2:  // hug a side face
        x[0] = (x[0] < 0.0 ? -1.0 : 1.0) * (1.0 - 1e-4 * (0.1 + lds.coord(i, dm1 + 1)));
        break;
      case 3:  // hug the exponential seam
        x[p.d - 1] = 1.0 + (lds.coord(i, dm1 + 1) - 0.5) * 2e-4;
        break;
      default:
        break;
    }
    if (x[p.d - 1] < 0.0) x[p.d - 1] = -x[p.d - 1];
    if (!fd_point_acceptable(x, kFdStep, p)) continue;
    ++accepted;
    Mat jac = jacobian_fd(x, kFdStep, p);
    SingularBounds sb = singular_bounds(jac, p.d);
    double jdet = determinant(jac, p.d);
    if (sb.ell <= 1e-6)
      throw numerical_error("calibration: derivative numerically degenerate (ell <= 1e-6)");
    if (jdet <= 0.0) throw numerical_error("calibration: orientation not preserved (J <= 0)");
    st.beta = std::min(st.beta, sb.ell);
    st.dfmax = std::max(st.dfmax, sb.norm);
    st.k_hat = std::max(st.k_hat, std::pow(sb.norm, p.d) / jdet);
    st.k_prime_hat = std::max(st.k_prime_hat, jdet / std::pow(sb.ell, p.d));
    low.emplace_back(sb.ell, x);
    if (low.size() > 96) {
      std::nth_element(low.begin(), low.begin() + 24, low.end(),
                       [](const auto& a, const auto& b) { return a.first < b.first; });
      low.resize(24);
    }
  }
  std::sort(low.begin(), low.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  if (low.size() > 24) low.resize(24);
  for (auto& lp : low) st.low_points.push_back(std::move(lp.second));
  return st;
}
}  // namespace detail

namespace detail {
inline double ell_at(const Vec& x, const MapParams& p) {
  if (!fd_point_acceptable(x, kFdStep, p)) return std::numeric_limits<double>::infinity();
  return singular_bounds(jacobian_fd(x, kFdStep, p), p.d).ell;
}

// Deterministic pattern-search descent toward the infimum of ell(DF); a raw
// sample minimum overshoots the essential infimum, and everything downstream
// needs beta to be a lower bound along generic paths.
inline double refine_ell_minimum(Vec x, double ell0, const MapParams& p) {
  double best = ell0;
  double h = 2e-3;
  Vec cand = x;
  while (h > 4e-7) {
    bool improved = false;
    for (int k = 0; k < p.d; ++k) {
      for (double sgn : {1.0, -1.0}) {
        cand = x;
        cand[k] += sgn * h;
        double e = ell_at(cand, p);
        if (e < best) {
          best = e;
          x = cand;
          improved = true;
        }
      }
    }
    if (!improved) h *= 0.5;
  }
  return best;
}
}  // namespace detail

inline double estimate_beta(long long n, std::uint64_t seed, const MapParams& p) {
  detail::DerivativeStats st = detail::derivative_stats(n, seed, p);
  double beta = st.beta;
  for (const Vec& x : st.low_points)
    beta = std::min(beta, detail::refine_ell_minimum(x, detail::ell_at(x, p), p));
  return beta;
}

inline MapParams choose_lambda(double beta_est, double margin, const MapParams& partial) {
  if (!(beta_est > 0.0)) throw domain_error("choose_lambda: beta must be positive");
  if (!(margin > 1.0)) throw domain_error("choose_lambda: margin must exceed 1");
  MapParams p = partial;
  p.beta_est = beta_est;
  p.lambda = margin * expansion_threshold(p.d) / beta_est;
  p.alpha = p.lambda * p.beta_est;
  return p;
}

inline CalibrationReport dilatation_report(long long n, std::uint64_t seed, const MapParams& p) {
  detail::DerivativeStats st = detail::derivative_stats(n, seed, p);
  CalibrationReport r;
  r.d = p.d;
  r.n = n;
  r.seed = seed;
  r.beta_est = p.beta_est;
  r.lambda = p.lambda;
  r.alpha = p.alpha;
  r.K_hat = st.k_hat;
  r.K_prime_hat = st.k_prime_hat;
  r.dfnorm_max = st.dfmax;
  return r;
}

// Full calibration: estimate beta, choose lambda, attach diagnostics.
inline CalibrationReport calibrate(int d, double margin, long long n, std::uint64_t seed,
                                   MapParams& out, FoldTie tie = FoldTie::TowardEvenLower) {
  MapParams base;
  base.d = d;
  base.tie = tie;
  base.lambda = 1.0;
  base.beta_est = 1.0;
  base.alpha = 1.0;
  detail::DerivativeStats st = detail::derivative_stats(n, seed, base);
  double beta = st.beta;
  for (const Vec& x : st.low_points)
    beta = std::min(beta, detail::refine_ell_minimum(x, detail::ell_at(x, base), base));
  st.beta = beta;
  out = choose_lambda(st.beta, margin, base);
  out.dfnorm_max = st.dfmax;
  CalibrationReport r;
  r.d = d;
  r.margin = margin;
  r.n = n;
  r.seed = seed;
  r.beta_est = st.beta;
  r.lambda = out.lambda;
  r.alpha = out.alpha;
  r.K_hat = st.k_hat;
  r.K_prime_hat = st.k_prime_hat;
  r.dfnorm_max = st.dfmax;
  return r;
}

}  // namespace qrs
