#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qrs/lds.hpp"
#include "qrs/map.hpp"

using namespace qrs;

namespace {
MapParams params_d(int d, double lambda = 10.0) {
  MapParams p;
  p.d = d;
  p.lambda = lambda;
  p.beta_est = 0.44;
  p.alpha = lambda * 0.44;
  return p;
}

Vec random_halfbeam_point(const LdsSampler& lds, std::uint64_t i, int d, double hmax) {
  Vec x(d);
  for (int k = 0; k < d - 1; ++k)
    x[k] = 2.0 * (std::floor(lds.coord(i, 4 + k) * 5.0) - 2.0) + 0.999 * lds.sym(i, k);
  x[d - 1] = (lds.coord(i, 7) < 0.5 ? 1.0 : -1.0) * hmax * lds.coord(i, d - 1);
  return x;
}
}  // namespace

TEST_CASE("half-beam map on the axis") {
  VecT<double> u{0.0, 0.0};
  Vec w = eval_half_beam(u, 0.4, 3);
  CHECK(w[0] == 0.0);
  CHECK(w[1] == 0.0);
  CHECK(w[2] == doctest::Approx(0.4));
  w = eval_half_beam(u, 2.0, 3);
  CHECK(w[2] == doctest::Approx(2.718281828459045).epsilon(1e-14));
}

TEST_CASE("top face reaches the unit sphere, side faces reach the hyperplane") {
  VecT<double> corner{1.0, 1.0};
  Vec w = eval_half_beam(corner, 1.0, 3);
  CHECK(w[0] == doctest::Approx(0.7071067811865476).epsilon(1e-12));
  CHECK(w[1] == doctest::Approx(0.7071067811865476).epsilon(1e-12));
  CHECK(w[2] == doctest::Approx(0.0));

  LdsSampler lds(3);
  for (int i = 1; i <= 3000; ++i) {
    VecT<double> u{lds.sym(i, 0), lds.sym(i, 1)};
    // top face h = 1: image on the unit sphere
    Vec top = eval_half_beam(u, 1.0, 3);
    CHECK(std::fabs(norm2(top) - 1.0) <= 1e-12);
    // base h = 0: image in the hyperplane
    Vec base = eval_half_beam(u, 0.0, 3);
    CHECK(std::fabs(base[2]) <= 1e-12);
    // side face |u|_inf = 1
    VecT<double> side = u;
    side[i % 2] = side[i % 2] < 0.0 ? -1.0 : 1.0;
    Vec sw = eval_half_beam(side, lds.coord(i, 5), 3);
    CHECK(std::fabs(sw[2]) <= 1e-12);
    // norm at most one exactly when h is at most one
    double h = 2.5 * lds.coord(i, 6);
    Vec any = eval_half_beam(u, h, 3);
    if (h <= 1.0)
      CHECK(norm2(any) <= 1.0 + 1e-12);
    else
      CHECK(norm2(any) >= 1.0 - 1e-12);
  }
}

TEST_CASE("half-beam inversion round trips") {
  auto [u0, h0] = invert_half_beam(Vec{0.0, 0.0, 2.718281828459045});
  CHECK(norminf(u0) == 0.0);
  CHECK(h0 == doctest::Approx(2.0).epsilon(1e-13));

  auto [u1, h1] = invert_half_beam(Vec{0.0, 0.0, 0.4});
  CHECK(norminf(u1) == 0.0);
  CHECK(h1 == doctest::Approx(0.4));

  CHECK_THROWS_AS(invert_half_beam(Vec{0.1, 0.0, -0.5}), branch_domain_error);

  LdsSampler lds(9);
  long long done = 0;
  for (int i = 1; done < 10000; ++i) {
    // upper half-space points with norms up to 50
    Vec w(3);
    Vec dir = lds_sphere(lds, i, 3);
    double r = 50.0 * std::pow(lds.coord(i, 6), 1.5);
    for (int k = 0; k < 3; ++k) w[k] = r * dir[k];
    w[2] = std::fabs(w[2]);
    ++done;
    auto [u, h] = invert_half_beam(w);
    Vec back = eval_half_beam(u, h, 3);
    CHECK(dist2(back, w) <= 1e-10 * std::max(1.0, norm2(w)));
  }
}

TEST_CASE("map vanishes exactly on the even lattice") {
  MapParams p = params_d(3);
  CHECK(norm2(s_eval(Vec{0.0, 0.0, 0.0}, p)) == 0.0);
  CHECK(norm2(s_eval(Vec{2.0, 0.0, 0.0}, p)) == 0.0);
  CHECK(norm2(s_eval(Vec{-4.0, 2.0, 0.0}, p)) == 0.0);
}

TEST_CASE("axis scaling and parity of the image") {
  MapParams p = params_d(3);
  Vec y = s_eval(Vec{0.0, 0.0, 1.0}, p);
  CHECK(y[0] == 0.0);
  CHECK(y[1] == 0.0);
  CHECK(y[2] == doctest::Approx(p.lambda));
  // odd lattice sum flips the image into the lower half-space
  Vec y2 = s_eval(Vec{2.4, -0.6, 0.7}, p);
  CHECK(y2[2] < 0.0);
}

TEST_CASE("hyperplane is invariant with image inside B(0, lambda)") {
  MapParams p = params_d(3);
  LdsSampler lds(17);
  for (int i = 1; i <= 3000; ++i) {
    Vec x{20.0 * lds.sym(i, 0), 20.0 * lds.sym(i, 1), 0.0};
    Vec y = s_eval(x, p);
    CHECK(std::fabs(y[2]) == 0.0);
    CHECK(norm2(y) <= p.lambda * (1.0 + 1e-12));
  }
}

TEST_CASE("upper half-beam maps into the closed upper half-space") {
  MapParams p = params_d(2);
  LdsSampler lds(19);
  for (int i = 1; i <= 10000; ++i) {
    Vec x{0.999 * lds.sym(i, 0), 3.0 * lds.coord(i, 1)};
    CHECK(s_eval(x, p)[1] >= -1e-12);
  }
}

TEST_CASE("both tie rules give the same map values") {
  MapParams lo = params_d(3);
  MapParams hi = lo;
  hi.tie = FoldTie::TowardEvenUpper;
  LdsSampler lds(23);
  for (int i = 1; i <= 500; ++i) {
    Vec x{static_cast<double>(2 * (i % 5) + 1), 1.9 * lds.sym(i, 1), 3.0 * lds.sym(i, 2)};
    Vec a = s_eval(x, lo), b = s_eval(x, hi);
    CHECK(dist2(a, b) <= 1e-12 * std::max(1.0, norm2(a)));
  }
}

TEST_CASE("seam continuity") {
  MapParams p = params_d(3);
  LdsSampler lds(29);
  const double nudge = 1e-8;
  for (int i = 1; i <= 10000; ++i) {
    Vec x{0.0, 1.9 * lds.sym(i, 1), 2.5 * lds.sym(i, 2)};
    int which = i % 2;
    if (which == 0) {
      x[0] = 1.0;  // odd hyperplane seam
    } else {
      x[0] = 1.9 * lds.sym(i, 0);
      x[2] = 0.0;  // invariant hyperplane seam
    }
    Vec lo = x, hi = x;
    lo[which == 0 ? 0 : 2] -= nudge;
    hi[which == 0 ? 0 : 2] += nudge;
    CHECK(dist2(s_eval(lo, p), s_eval(hi, p)) <= 1e-5 * p.lambda);
  }
}

TEST_CASE("uniform expansion on common half-beams, sampled") {
  // claimed floor 0.19 sits below the map's measured floor (~0.207), so the
  // sampled inequality is comfortably true
  MapParams p = params_d(2, 22.0);
  p.beta_est = 0.19;
  p.alpha = p.lambda * p.beta_est;
  LdsSampler lds(31);
  for (int i = 1; i <= 20000; ++i) {
    Vec a{0.999 * lds.sym(i, 0), 2.0 * lds.coord(i, 1)};
    Vec b{0.999 * lds.sym(i, 2), 2.0 * lds.coord(i, 3)};
    double dx = dist2(a, b);
    if (dx < 1e-9) continue;
    CHECK(dist2(s_eval(a, p), s_eval(b, p)) >= (p.alpha - 1e-9) * dx);
  }
}

TEST_CASE("inverse branches undo the map") {
  MapParams p = params_d(3);
  LdsSampler lds(37);
  for (int i = 1; i <= 10000; ++i) {
    Vec x = random_halfbeam_point(lds, i, 3, 4.0);
    BeamIndex b = halfbeam_of(x, p);
    Vec y = s_eval(x, p);
    Vec back = inverse_branch(y, make_halfbeam_branch(b), p);
    CHECK(dist2(back, x) <= 1e-10 * std::max(1.0, norm2(x)));
  }
}

TEST_CASE("map and branches work in higher dimensions") {
  MapParams p = params_d(5);
  LdsSampler lds(53);
  for (int i = 1; i <= 800; ++i) {
    Vec x = random_halfbeam_point(lds, i, 5, 3.0);
    Vec y = s_eval(x, p);
    Vec back = inverse_branch(y, make_halfbeam_branch(halfbeam_of(x, p)), p);
    CHECK(dist2(back, x) <= 1e-10 * std::max(1.0, norm2(x)));
  }
  CHECK(norm2(s_eval(Vec{2.0, 0.0, -4.0, 6.0, 0.0}, p)) == 0.0);
}

TEST_CASE("full-beam branch sends zero to the beam's lattice point") {
  MapParams p = params_d(3);
  Vec z = inverse_branch(Vec{0.0, 0.0, 0.0}, make_fullbeam_branch({2, -1}), p);
  CHECK(z[0] == doctest::Approx(4.0));
  CHECK(z[1] == doctest::Approx(-2.0));
  CHECK(z[2] == doctest::Approx(0.0));
}

TEST_CASE("axis inverse recovers the unit height") {
  MapParams p = params_d(3);
  Vec x = inverse_branch(Vec{0.0, 0.0, p.lambda},
                         make_halfbeam_branch(BeamIndex{{0, 0}, +1}), p);
  CHECK(dist2(x, Vec{0.0, 0.0, 1.0}) <= 1e-12);
}

TEST_CASE("half-beam branch rejects the wrong half-space") {
  MapParams p = params_d(2);
  BranchSpec t0 = make_halfbeam_branch(BeamIndex{{0}, +1});
  CHECK_THROWS_AS(inverse_branch(Vec{0.3, -2.0}, t0, p), branch_domain_error);
  CHECK_THROWS_AS(
      inverse_branch(Vec{std::numeric_limits<double>::infinity(), 0.0}, t0, p), domain_error);
}

TEST_CASE("pair branch contracts by one over alpha") {
  // calibrated-style params with the true floor for this check
  MapParams p = params_d(2, 20.0);
  p.beta_est = 0.2;
  p.alpha = p.lambda * p.beta_est;
  LdsSampler lds(41);
  long long done = 0;
  for (int i = 1; done < 10000; ++i) {
    // pair across a shared face, crossing points generated through the face
    bool side_pair = i % 2 == 0;
    BeamIndex a{{static_cast<long long>(std::floor(lds.coord(i, 4) * 5.0)) - 2}, +1};
    BeamIndex b = a;
    if (side_pair)
      b.r[0] += lds.coord(i, 5) < 0.5 ? 1 : -1;
    else
      b.sign = -1;
    BranchSpec pair = make_pair_branch(a, b);
    // a point on the shared face
    Vec g(2);
    if (side_pair) {
      g[0] = static_cast<double>(a.r[0] + b.r[0]);
      g[1] = 0.1 + 2.0 * lds.coord(i, 6);
    } else {
      g[0] = 2.0 * a.r[0] + 0.95 * lds.sym(i, 6);
      g[1] = 0.0;
    }
    Vec y0 = s_eval(g, p);
    Vec v = lds_sphere(lds, i, 2);
    if (std::fabs(v[1]) < 1e-3) continue;
    ++done;
    double t1 = 0.02 + 0.4 * lds.coord(i, 7);
    double t2 = 0.02 + 0.4 * lds.coord(i, 8);
    Vec y1(2), y2(2);
    for (int k = 0; k < 2; ++k) {
      y1[k] = y0[k] + t1 * v[k];
      y2[k] = y0[k] - t2 * v[k];
    }
    Vec x1 = inverse_branch(y1, pair, p);
    Vec x2 = inverse_branch(y2, pair, p);
    CHECK(dist2(x1, x2) <= (1.0 / p.alpha + 1e-9) * dist2(y1, y2));
  }
}

TEST_CASE("pair branch resolves hyperplane points through the shared face") {
  MapParams p = params_d(2, 20.0);
  BranchSpec pair = make_pair_branch(BeamIndex{{0}, +1}, BeamIndex{{1}, +1});
  Vec g{1.0, 0.8};  // on the shared face
  Vec y0 = s_eval(g, p);
  CHECK(std::fabs(y0[1]) == 0.0);
  Vec back = inverse_branch(y0, pair, p);
  CHECK(dist2(back, g) <= 1e-10);
}
