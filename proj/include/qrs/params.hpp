#pragma once

#include <cmath>
#include <cstdint>

#include "qrs/exceptions.hpp"

namespace qrs {

// Tie rule for folding at odd-integer coordinates. Both choices give the
// same map value (side faces land in the invariant hyperplane), only the
// fold bookkeeping differs.
enum class FoldTie { TowardEvenLower, TowardEvenUpper };

// Frozen definition of the map S = lambda * F. alpha = lambda * beta_est is
// the calibrated uniform expansion floor.
struct MapParams {
  int d = 2;
  double lambda = 1.0;
  double beta_est = 1.0;
  double alpha = 1.0;
  FoldTie tie = FoldTie::TowardEvenLower;
  // Sampled max of ||DF||; lambda * dfnorm_max bounds typical one-step error
  // amplification and feeds the forward-residual tolerance model.
  double dfnorm_max = 0.0;
};

inline double expansion_threshold(int d) { return 4.0 * std::sqrt(static_cast<double>(d - 1)); }

inline MapParams unit_lambda(const MapParams& p) {
  MapParams q = p;
  q.lambda = 1.0;
  q.alpha = q.beta_est;
  return q;
}

inline void require_valid(const MapParams& p) {
  if (p.d < 2) throw domain_error("MapParams: d must be >= 2");
  if (!(p.lambda > 0.0)) throw domain_error("MapParams: lambda must be positive");
}

// Whether the calibrated expansion floor clears the geometric threshold.
inline bool expansion_ok(const MapParams& p) { return p.alpha > expansion_threshold(p.d); }

// Central tolerance table.
inline constexpr double kTolAlgebraic = 1e-12;  // exact algebraic identities
inline constexpr double kTolRoundTrip = 1e-10;  // round trips through transcendentals
inline constexpr double kTolSlack = 1e-9;       // inequality slack

// Forward-residual tolerance: one-step rounding amplified by at most twice
// the sampled derivative norm per iterate.
inline double tol_fwd(const MapParams& p, long long period) {
  double lam_hat = 2.0 * p.lambda * (p.dfnorm_max > 0.0 ? p.dfnorm_max : 3.0);
  return 1e-10 * std::pow(lam_hat, static_cast<double>(period));
}

}  // namespace qrs
