#pragma once

// Escape-time rendering of a 2-plane slice to binary P6 output. Pixels are
// independent; tiles are rows pre-assigned to workers, so the byte stream is
// identical for any worker count.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

#include "qrs/map.hpp"

namespace qrs {

struct SliceSpec {
  Vec origin;
  Vec axis_u;
  Vec axis_v;
  int width = 512;
  int height = 512;
  double scale = 0.01;  // units per pixel
  long long kmax = 64;
  double bailout = 1e6;
};

inline void validate(const SliceSpec& s, const MapParams& p) {
  if (static_cast<int>(s.origin.size()) != p.d || static_cast<int>(s.axis_u.size()) != p.d ||
      static_cast<int>(s.axis_v.size()) != p.d)
    throw domain_error("SliceSpec: axis dimension mismatch");
  if (std::fabs(norm2(s.axis_u) - 1.0) > kTolAlgebraic ||
      std::fabs(norm2(s.axis_v) - 1.0) > kTolAlgebraic)
    throw domain_error("SliceSpec: axes must be unit vectors");
  if (std::fabs(dot(s.axis_u, s.axis_v)) > kTolAlgebraic)
    throw domain_error("SliceSpec: axes must be orthogonal");
  if (s.width < 1 || s.height < 1 || !(s.scale > 0.0)) throw domain_error("SliceSpec: bad raster");
  if (s.kmax < 1) throw domain_error("SliceSpec: kmax must be positive");
}

// First k with orbit norm beyond the bailout, else kmax+1 as the bounded
// sentinel.
inline long long escape_time(const Vec& x0, long long kmax, double bailout, const MapParams& p,
                             EvalScratch& sc) {
  Vec x = x0;
  double b2 = bailout * bailout;
  for (long long k = 0; k <= kmax; ++k) {
    double n = 0.0;
    for (double c : x) n += c * c;
    if (!(n <= b2)) return k;
    if (k == kmax) break;
    s_eval_inplace(x, p, sc);
  }
  return kmax + 1;
}

namespace detail {
// fixed monotone palette over t in [0, 1]; bounded sentinel maps to black
inline void palette(double t, std::uint8_t* rgb) {
  double r = std::pow(t, 0.45);
  double g = std::pow(t, 0.85);
  double b = std::sqrt(std::max(0.0, 1.0 - 0.75 * t));
  rgb[0] = static_cast<std::uint8_t>(std::floor(255.0 * r + 0.5));
  rgb[1] = static_cast<std::uint8_t>(std::floor(255.0 * g + 0.5));
  rgb[2] = static_cast<std::uint8_t>(std::floor(255.0 * b * (t > 0.0 ? 1.0 : 0.0) + 0.5));
}
}  // namespace detail

inline std::vector<std::uint8_t> render_slice(const SliceSpec& s, const MapParams& p,
                                              int threads = 1) {
  validate(s, p);
  if (threads < 1) threads = 1;
  std::vector<std::uint8_t> img(static_cast<std::size_t>(s.width) * s.height * 3);
  auto worker = [&](int tid) {
    EvalScratch sc;
    Vec x(p.d);
    for (int py = tid; py < s.height; py += threads) {
      double v = (py + 0.5 - s.height * 0.5) * s.scale;
      std::uint8_t* row = img.data() + static_cast<std::size_t>(py) * s.width * 3;
      for (int px = 0; px < s.width; ++px) {
        double u = (px + 0.5 - s.width * 0.5) * s.scale;
        for (int k = 0; k < p.d; ++k) x[k] = s.origin[k] + u * s.axis_u[k] + v * s.axis_v[k];
        long long esc = escape_time(x, s.kmax, s.bailout, p, sc);
        if (esc > s.kmax) {
          row[px * 3] = row[px * 3 + 1] = row[px * 3 + 2] = 0;  // bounded sentinel
        } else {
          detail::palette(1.0 - static_cast<double>(esc) / (s.kmax + 1.0), row + px * 3);
        }
      }
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker, t);
    for (auto& th : pool) th.join();
  }
  return img;
}

inline void write_ppm(std::ostream& out, const std::vector<std::uint8_t>& img, int width,
                      int height) {
  out << "P6\n" << width << " " << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data()), static_cast<std::streamsize>(img.size()));
}

inline void write_ppm(const std::string& path, const std::vector<std::uint8_t>& img, int width,
                      int height) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw domain_error("write_ppm: cannot open '" + path + "'");
  write_ppm(out, img, width, height);
  if (!out) throw domain_error("write_ppm: write failed for '" + path + "'");
}

}  // namespace qrs
