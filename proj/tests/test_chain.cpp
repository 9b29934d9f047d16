#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qrs/chain.hpp"
#include "qrs/lds.hpp"

using namespace qrs;

namespace {
// fixed synthetic calibration: d = 2, lambda = 22, beta 0.2, alpha 4.4
MapParams p22() {
  MapParams p;
  p.d = 2;
  p.lambda = 22.0;
  p.beta_est = 0.2;
  p.alpha = 4.4;
  return p;
}
}  // namespace

TEST_CASE("propagate keeps the axis center and scales the radius exactly") {
  MapParams p = p22();
  CertifiedBall b{Vec{0.0, 0.5}, 0.1, make_halfbeam_branch(BeamIndex{{0}, +1}), false};
  CertifiedBall nb = propagate_ball(b, p);
  CHECK(nb.center[0] == 0.0);
  CHECK(nb.center[1] == doctest::Approx(0.5 * p.lambda));
  CHECK(nb.radius == doctest::Approx(p.alpha * 0.1).epsilon(1e-15));
  CHECK(nb.domain.kind == BranchKind::HalfBeam);

  BallChain chain;
  chain.balls = {b, nb};
  chain.steps = {b.domain};
  ChainCheck cc = check_chain(chain, p);
  CHECK(cc.ok);
}

TEST_CASE("cross-face step straddles the crossed face") {
  MapParams p = p22();
  // center whose image lands near an odd hyperplane: S((x,0.2)) has first
  // coordinate lambda * a; choose x so that the image sits around 0.96
  Vec c{0.039, 0.2};
  Vec y = s_eval(c, p);
  double rho = 0.2;
  double t = rho / p.alpha;
  CertifiedBall b{c, t, make_halfbeam_branch(BeamIndex{{0}, +1}), false};
  REQUIRE(!fit_single_halfbeam(y, rho, p).fits);
  CertifiedBall pb = cross_face_step(b, p);
  CHECK(pb.domain.kind == BranchKind::AdjacentPair);
  CHECK(pb.radius > 1e-9);
  // the center sits exactly on the shared face
  double face = static_cast<double>(pb.domain.primary.r[0] + pb.domain.secondary->r[0]);
  CHECK(pb.center[0] == doctest::Approx(face));
  // both half-beams touch the returned ball
  CHECK(dist_to_branch_boundary(pb.center, pb.domain) >= pb.radius * (1.0 - 1e-9));
  // contained in the certified image ball
  CHECK(dist2(pb.center, y) + pb.radius <= rho * (1.0 + 1e-12));

  BallChain chain;
  chain.balls = {b, pb};
  chain.steps = {b.domain};
  CHECK(check_chain(chain, p).ok);

  // precondition: a comfortably fitting image must be rejected
  CertifiedBall fits{Vec{0.0, 0.5}, 0.01, make_halfbeam_branch(BeamIndex{{0}, +1}), false};
  CHECK_THROWS_AS(cross_face_step(fits, p), domain_error);
}

TEST_CASE("hyperplane recentering follows the square construction") {
  MapParams p = p22();
  Vec c{0.039, 0.2};
  double t = 0.2 / p.alpha;
  CertifiedBall b{c, t, make_halfbeam_branch(BeamIndex{{0}, +1}), false};
  CertifiedBall pb = cross_face_step(b, p);
  CertifiedBall hb = h0_recenter(pb, p);
  CHECK(hb.domain.kind == BranchKind::FullBeam);
  CHECK(hb.center[1] == 0.0);
  double rho = p.alpha * pb.radius;
  CHECK(hb.radius == doctest::Approx(std::min(rho / 2.0, 0.5)));
  // the recentered ball sits inside the certified image ball around S(center)
  Vec x = s_eval(pb.center, p);
  x[1] = 0.0;
  CHECK(dist2(hb.center, x) + hb.radius <= rho * (1.0 + 1e-9));

  BallChain chain;
  chain.balls = {pb, hb};
  chain.steps = {pb.domain};
  CHECK(check_chain(chain, p).ok);
}

TEST_CASE("growth on the hyperplane doubles and caps at one half") {
  MapParams p = p22();
  for (double t : {0.1, 0.3, 0.5}) {
    CertifiedBall b{Vec{0.3, 0.0}, t, make_fullbeam_branch({0}), false};
    CertifiedBall g = grow_on_h0(b, p);
    CHECK(g.radius == doctest::Approx(std::min(2.0 * t, 0.5)));
    CHECK(g.center[1] == 0.0);
    CHECK(g.domain.kind == BranchKind::FullBeam);
    CHECK(dist_to_branch_boundary(g.center, g.domain) >= g.radius - 1e-12);
    BallChain chain;
    chain.balls = {b, g};
    chain.steps = {b.domain};
    CHECK(check_chain(chain, p).ok);
  }
}

TEST_CASE("zero ball sits on the nearest even lattice point") {
  MapParams p = p22();
  CertifiedBall b{Vec{0.2, 0.0}, 0.5, make_fullbeam_branch({0}), false};
  CertifiedBall z = locate_zero_ball(b, p);
  CHECK(z.radius == 1.0);
  CHECK(z.center[1] == 0.0);
  CHECK(std::fmod(z.center[0], 2.0) == 0.0);
  Vec x = s_eval(b.center, p);
  CHECK(dist2(z.center, x) <= std::sqrt(static_cast<double>(p.d - 1)) + 1e-9);
  CHECK(norm2(s_eval(z.center, p)) == 0.0);

  BallChain chain;
  chain.balls = {b, z};
  chain.steps = {b.domain};
  CHECK(check_chain(chain, p).ok);

  CHECK_THROWS_AS(locate_zero_ball(CertifiedBall{Vec{0.2, 0.0}, 0.4, b.domain, false}, p),
                  domain_error);
}

TEST_CASE("tail index arithmetic") {
  MapParams p = p22();
  BranchSpec t0 = make_halfbeam_branch(BeamIndex{{0}, +1});
  CertifiedBall u0{Vec{0.0, 0.5}, 0.05, t0, false};
  TailChain tc = tail_chain(u0, 7, p);
  // max norm 0.55 < alpha, so one tail set suffices: N = m + 2
  CHECK(tc.N == 9);
  CHECK(tc.balls.size() == 1);
  CHECK(tc.balls[0].clipped);
  CHECK(tc.balls[0].radius == doctest::Approx(p.alpha));

  // max norm exactly alpha forces one more set
  CertifiedBall big{Vec{0.0, p.alpha - 0.2}, 0.2, t0, false};
  // not strictly inside the fundamental half-beam horizontally? it is: |x_j|=0
  TailChain tc2 = tail_chain(big, 7, p);
  CHECK(tc2.N == 10);

  CHECK_THROWS_AS(tail_chain(CertifiedBall{Vec{0.99, 0.5}, 0.05, t0, false}, 3, p), domain_error);
}

TEST_CASE("pair and full beam chains pass the pullback certificate") {
  MapParams p = p22();
  // full-beam ball around a hyperplane center, image ball pulled back
  LdsSampler lds(51);
  for (int i = 1; i <= 50; ++i) {
    Vec x{0.9 * lds.sym(i, 0), 0.0};
    double slack = dist_to_branch_boundary(x, make_fullbeam_branch({0}));
    double t = slack * (0.1 + 0.8 * lds.coord(i, 3));
    CertifiedBall b{x, t, make_fullbeam_branch({0}), false};
    CertifiedBall img{s_eval(x, p), p.alpha * t, make_fullbeam_branch({0}), false};
    img.domain = b.domain;
    BallChain chain;
    chain.balls = {b, img};
    chain.steps = {b.domain};
    CHECK(check_chain(chain, p, 64).ok);
  }
}
