#pragma once

// Smallest/largest singular value of a small dense matrix via cyclic Jacobi
// on A^T A, and an LU determinant. Matrices are row-major d x d.

#include <cmath>
#include <utility>
#include <vector>

#include "qrs/exceptions.hpp"

namespace qrs {

using Mat = std::vector<double>;  // row-major, size d*d

inline double mat_at(const Mat& m, int d, int i, int j) { return m[i * d + j]; }

struct SingularBounds {
  double ell;   // smallest singular value
  double norm;  // largest singular value
};

inline SingularBounds singular_bounds(const Mat& a, int d) {
  // B = A^T A, symmetric PSD
  Mat b(d * d, 0.0);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      double s = 0.0;
      for (int k = 0; k < d; ++k) s += a[k * d + i] * a[k * d + j];
      b[i * d + j] = s;
    }
  double frob = 0.0;
  for (double v : b) frob += v * v;
  frob = std::sqrt(frob);
  const double tol = 1e-15 * std::max(frob, 1e-300);
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) off += 2.0 * b[i * d + j] * b[i * d + j];
    if (std::sqrt(off) <= tol) break;
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) {
        double bij = b[i * d + j];
        if (std::fabs(bij) <= tol * 1e-2) continue;
        double tau = (b[j * d + j] - b[i * d + i]) / (2.0 * bij);
        double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::fabs(tau) + std::sqrt(1.0 + tau * tau));
        double c = 1.0 / std::sqrt(1.0 + t * t);
        double s = t * c;
        for (int k = 0; k < d; ++k) {
          double bik = b[i * d + k], bjk = b[j * d + k];
          b[i * d + k] = c * bik - s * bjk;
          b[j * d + k] = s * bik + c * bjk;
        }
        for (int k = 0; k < d; ++k) {
          double bki = b[k * d + i], bkj = b[k * d + j];
          b[k * d + i] = c * bki - s * bkj;
          b[k * d + j] = s * bki + c * bkj;
        }
      }
  }
  double lo = b[0], hi = b[0];
  for (int i = 1; i < d; ++i) {
    double v = b[i * d + i];
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return {std::sqrt(std::max(lo, 0.0)), std::sqrt(std::max(hi, 0.0))};
}

inline double determinant(Mat a, int d) {
  double det = 1.0;
  for (int col = 0; col < d; ++col) {
    int piv = col;
    for (int r = col + 1; r < d; ++r)
      if (std::fabs(a[r * d + col]) > std::fabs(a[piv * d + col])) piv = r;
    if (a[piv * d + col] == 0.0) return 0.0;
    if (piv != col) {
      for (int k = 0; k < d; ++k) std::swap(a[piv * d + k], a[col * d + k]);
      det = -det;
    }
    det *= a[col * d + col];
    for (int r = col + 1; r < d; ++r) {
      double f = a[r * d + col] / a[col * d + col];
      for (int k = col; k < d; ++k) a[r * d + k] -= f * a[col * d + k];
    }
  }
  return det;
}

}  // namespace qrs
