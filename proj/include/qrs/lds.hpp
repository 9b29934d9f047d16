#pragma once

// Deterministic low-discrepancy sampling. Everything here is a pure function
// of (seed, index), so any sampling loop is reproducible regardless of how
// work is split across threads.

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "qrs/vec.hpp"

namespace qrs {

inline constexpr std::array<std::uint32_t, 12> kPrimes = {2,  3,  5,  7,  11, 13,
                                                          17, 19, 23, 29, 31, 37};

// Radical-inverse (van der Corput) in the given base.
inline double vdc(std::uint64_t index, std::uint32_t base) {
  double inv = 1.0 / base;
  double f = inv;
  double x = 0.0;
  while (index > 0) {
    x += f * static_cast<double>(index % base);
    index /= base;
    f *= inv;
  }
  return x;
}

// Seed offsets the sequence; dimension j uses the j-th prime base.
struct LdsSampler {
  std::uint64_t offset;
  explicit LdsSampler(std::uint64_t seed) : offset(seed * 1000003ULL + 1) {}
  double coord(std::uint64_t i, unsigned dim) const {
    return vdc(offset + i, kPrimes[dim % kPrimes.size()]);
  }
  // in (-1, 1)
  double sym(std::uint64_t i, unsigned dim) const { return 2.0 * coord(i, dim) - 1.0; }
};

// Pairwise Box-Muller on van der Corput coordinates.
inline double lds_gaussian(const LdsSampler& s, std::uint64_t i, unsigned k) {
  unsigned pair = k / 2;
  double u1 = s.coord(i, 2 * pair);
  double u2 = s.coord(i, 2 * pair + 1);
  if (u1 < 1e-12) u1 = 1e-12;
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 2.0 * 3.14159265358979323846 * u2;
  return (k % 2 == 0) ? r * std::cos(a) : r * std::sin(a);
}

// Quasi-uniform point on the unit sphere in R^d.
inline Vec lds_sphere(const LdsSampler& s, std::uint64_t i, int d) {
  Vec v(d);
  double n2 = 0.0;
  for (int k = 0; k < d; ++k) {
    v[k] = lds_gaussian(s, i, static_cast<unsigned>(k));
    n2 += v[k] * v[k];
  }
  if (n2 < 1e-30) {
    v.assign(d, 0.0);
    v[0] = 1.0;
    return v;
  }
  double inv = 1.0 / std::sqrt(n2);
  for (double& c : v) c *= inv;
  return v;
}

// --- Sobol sequence, first 10 dimensions (enough for d <= 8 plus radius) ---

namespace detail {
struct SobolDim {
  unsigned s;
  unsigned a;
  std::array<unsigned, 5> m;
};
// Classic direction-number table for the leading dimensions.
inline constexpr std::array<SobolDim, 9> kSobolDims = {{
    {1, 0, {1, 0, 0, 0, 0}},
    {2, 1, {1, 3, 0, 0, 0}},
    {3, 1, {1, 3, 1, 0, 0}},
    {3, 2, {1, 1, 1, 0, 0}},
    {4, 1, {1, 1, 3, 3, 0}},
    {4, 4, {1, 3, 5, 13, 0}},
    {5, 2, {1, 1, 5, 5, 17}},
    {5, 4, {1, 1, 5, 5, 5}},
    {5, 7, {1, 1, 7, 11, 19}},
}};
}  // namespace detail

class Sobol {
 public:
  Sobol(int dims, std::uint64_t seed) : dims_(dims), x_(dims, 0), index_(0) {
    constexpr int kBits = 32;
    v_.assign(dims_, std::vector<std::uint32_t>(kBits, 0));
    for (int j = 0; j < dims_; ++j) {
      if (j == 0) {
        for (int k = 0; k < kBits; ++k) v_[0][k] = 1u << (31 - k);
        continue;
      }
      const auto& dim = detail::kSobolDims[(j - 1) % detail::kSobolDims.size()];
      unsigned s = dim.s;
      for (unsigned k = 0; k < s; ++k) v_[j][k] = dim.m[k] << (31 - k);
      for (unsigned k = s; k < kBits; ++k) {
        std::uint32_t val = v_[j][k - s] ^ (v_[j][k - s] >> s);
        for (unsigned l = 1; l < s; ++l)
          if ((dim.a >> (s - 1 - l)) & 1u) val ^= v_[j][k - l];
        v_[j][k] = val;
      }
    }
    // burn in past the origin plus a seed-dependent offset
    std::uint64_t skip = 16 + (seed % 1024);
    for (std::uint64_t i = 0; i < skip; ++i) next();
  }

  Vec next() {
    std::uint64_t c = index_ + 1;
    unsigned bit = 0;
    while (c & 1) {
      c >>= 1;
      ++bit;
    }
    Vec out(dims_);
    for (int j = 0; j < dims_; ++j) {
      x_[j] ^= v_[j][bit];
      out[j] = static_cast<double>(x_[j]) * (1.0 / 4294967296.0);
    }
    ++index_;
    return out;
  }

 private:
  int dims_;
  std::vector<std::vector<std::uint32_t>> v_;
  std::vector<std::uint32_t> x_;
  std::uint64_t index_;
};

// Quasi-random point in the open ball B(center, radius).
inline Vec sobol_ball_point(Sobol& sobol, const Vec& center, double radius) {
  int d = static_cast<int>(center.size());
  Vec u = sobol.next();
  Vec dir(d);
  double n2 = 0.0;
  for (int k = 0; k < d; ++k) {
    double u1 = std::max(u[k], 1e-12);
    double u2 = u[(k + 1) % d];
    dir[k] = std::sqrt(-2.0 * std::log(u1)) *
             std::cos(2.0 * 3.14159265358979323846 * u2 + k);
    n2 += dir[k] * dir[k];
  }
  double inv = n2 > 1e-30 ? 1.0 / std::sqrt(n2) : 0.0;
  double r = radius * std::pow(std::max(u[d % u.size()], 1e-12), 1.0 / d);
  Vec p(d);
  for (int k = 0; k < d; ++k) p[k] = center[k] + r * dir[k] * inv;
  return p;
}

}  // namespace qrs
