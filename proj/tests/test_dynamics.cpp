#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qrs/dynamics.hpp"

using namespace qrs;

namespace {
const MapParams& cal2() {
  static MapParams p = [] {
    MapParams q;
    calibrate(2, 1.1, 20000, 1, q);
    return q;
  }();
  return p;
}
const MapParams& cal3() {
  static MapParams p = [] {
    MapParams q;
    calibrate(3, 1.1, 20000, 1, q);
    return q;
  }();
  return p;
}
}  // namespace

TEST_CASE("axis orbits climb monotonically and escape") {
  const MapParams& p = cal2();
  OrbitResult r = orbit(Vec{0.0, 2.0}, 50, 1e6, p);
  for (std::size_t i = 0; i + 1 < r.points.size(); ++i) {
    CHECK(r.points[i][0] == 0.0);
    CHECK(r.points[i + 1][1] > r.points[i][1]);
  }
  CHECK(classify_escape(Vec{0.0, 2.0}, 100, 1e6, p) == EscapeClass::EscapedHeuristic);
}

TEST_CASE("zero is a fixed point and the hyperplane never escapes") {
  const MapParams& p = cal2();
  OrbitResult r = orbit(Vec{0.0, 0.0}, 10, 1e6, p);
  for (const Vec& q : r.points) CHECK(norm2(q) == 0.0);
  CHECK(classify_escape(Vec{2.0, 0.0}, 100, 1e6, p) == EscapeClass::BoundedSoFar);
  LdsSampler lds(61);
  for (int i = 1; i <= 50; ++i) {
    Vec x{30.0 * lds.sym(i, 0), 0.0};
    OrbitResult rr = orbit(x, 100, 1e6, p);
    CHECK(!rr.overflowed);
    for (std::size_t k = 1; k < rr.points.size(); ++k) {
      CHECK(std::fabs(rr.points[k][1]) == 0.0);
      CHECK(norm2(rr.points[k]) <= p.lambda * (1.0 + 1e-12));
    }
    CHECK(classify_escape(x, 100, 1e6, p) == EscapeClass::BoundedSoFar);
  }
  CHECK_THROWS_AS(classify_escape(Vec{0.0, 1.0}, 10, 1.0, p), domain_error);
}

TEST_CASE("periodic point in the reference ball") {
  const MapParams& p = cal2();
  Vec c{0.0, 0.5};
  PeriodicPointResult r = find_periodic(c, 0.05, p);
  CHECK(r.period >= 1);
  CHECK(dist2(r.point, c) <= 0.05);
  CHECK(r.backward_residual < 1e-10);
  CHECK(r.forward_residual < tol_fwd(p, r.period));
  // the point lies in the first chain ball
  CHECK(dist2(r.point, r.chain.balls.front().center) <=
        r.chain.balls.front().radius * (1.0 + 1e-9));
  // chain bookkeeping
  CHECK(r.chain.steps.size() == r.chain.balls.size() - 1);
  CHECK(static_cast<long long>(r.chain.steps.size()) == r.period);
  ChainCheck cc = check_chain(r.chain, p);
  CHECK(cc.ok);

  // phase-A radii grow exactly by alpha until the cross-face step
  for (std::size_t j = 0; j + 1 < r.chain.balls.size(); ++j) {
    if (r.chain.balls[j + 1].domain.kind != BranchKind::HalfBeam) break;
    if (r.chain.balls[j].domain.kind != BranchKind::HalfBeam) break;
    double ratio = r.chain.balls[j + 1].radius / r.chain.balls[j].radius;
    CHECK(ratio == doctest::Approx(p.alpha).epsilon(1e-12));
  }

  // grow-phase radii follow min(2t, 1/2)
  for (std::size_t j = 0; j + 1 < r.chain.balls.size(); ++j) {
    const CertifiedBall& a = r.chain.balls[j];
    const CertifiedBall& b = r.chain.balls[j + 1];
    if (a.domain.kind == BranchKind::FullBeam && b.domain.kind == BranchKind::FullBeam &&
        !a.clipped && !b.clipped && std::fabs(a.center[p.d - 1]) == 0.0 && b.radius < 1.0)
      CHECK(b.radius == doctest::Approx(std::min(2.0 * a.radius, 0.5)));
  }

  // composed inverse is a strong contraction: successive distances shrink by
  // at least alpha^-N (plus rounding slack)
  Vec x0 = r.chain.balls.front().center;
  Vec x1 = detail::apply_inverse_chain(r.chain, x0, p);
  Vec x2 = detail::apply_inverse_chain(r.chain, x1, p);
  double d1 = dist2(x1, x0), d2 = dist2(x2, x1);
  if (d1 > 1e-13)
    CHECK(d2 / d1 <= std::pow(p.alpha, -static_cast<double>(r.period)) + 1e-9);

  // measured contraction of the composed inverse on point pairs
  LdsSampler lds(71);
  for (int i = 1; i <= 10; ++i) {
    Vec y1 = x0, y2 = x0;
    for (int k = 0; k < p.d; ++k) {
      y1[k] += 0.01 * lds.sym(i, k);
      y2[k] += 0.01 * lds.sym(i, k + 3);
    }
    Vec z1 = detail::apply_inverse_chain(r.chain, y1, p);
    Vec z2 = detail::apply_inverse_chain(r.chain, y2, p);
    CHECK(dist2(z1, z2) <=
          (std::pow(p.alpha, -static_cast<double>(r.period)) + 1e-9) * dist2(y1, y2));
  }
}

TEST_CASE("find_periodic validates its ball") {
  const MapParams& p = cal2();
  CHECK_THROWS_AS(find_periodic(Vec{5.0, 0.5}, 0.05, p), domain_error);   // outside T_0
  CHECK_THROWS_AS(find_periodic(Vec{0.0, 0.02}, 0.05, p), domain_error);  // touches the base
}

TEST_CASE("probe finds periodic and escaping points in a generic ball") {
  const MapParams& p = cal2();
  Vec c{5.3, -0.6};
  ProbeResult pr = probe_density(c, 0.35, 128, p);
  CHECK(dist2(pr.periodic.point, c) <= 0.35);
  CHECK(pr.periodic.backward_residual < 1e-10);
  CHECK(pr.periodic.forward_residual < tol_fwd(p, pr.periodic.period));
  CHECK(pr.escape_proxy.has_value());
  CHECK(dist2(*pr.escape_proxy, c) <= 0.35);
  CHECK(classify_escape(*pr.escape_proxy, 100, 1e6, p) == EscapeClass::EscapedHeuristic);
  // the seed point relates to the returned point by the recorded pushes
  Vec q = pr.seed_point;
  EvalScratch sc;
  for (int e = 0; e < pr.push_steps; ++e) s_eval_inplace(q, p, sc);
  CHECK(dist2(q, pr.periodic.point) <= 1e-9 * std::max(1.0, norm2(q)));
}

TEST_CASE("probing near the origin recovers a point close to the fixed zero") {
  const MapParams& p = cal2();
  ProbeResult pr = probe_density(Vec{0.05, 0.05}, 0.25, 256, p, 100, 1e6, 5);
  CHECK(dist2(pr.periodic.point, Vec{0.05, 0.05}) <= 0.28);
  CHECK(pr.periodic.backward_residual < 1e-10);
}

TEST_CASE("blow-up certificate on the reference ball") {
  // a ball overlapping the face slab keeps the whole chain short, which is
  // what the extended-precision pullback verification needs
  const MapParams& p = cal2();
  BlowupCertificate c = certify_blowup(Vec{0.9, 0.3}, 0.08, 10.0, p);
  CHECK(c.k >= 1);
  CHECK(c.samples.size() == 100);
  CHECK(c.max_error < 1e-6);
  for (const BlowupSample& s : c.samples) {
    CHECK(dist2(s.x, Vec{0.9, 0.3}) <= 0.08);
    CHECK(norm2(s.y) <= 10.0 * (1.0 + 1e-12));
  }
  // k grows monotonically with R through the tail formula
  BlowupCertificate c2 = certify_blowup(Vec{0.9, 0.3}, 0.08, 40.0, p);
  CHECK(c2.k >= c.k);
}

TEST_CASE("zero pulls back through the lattice zero chain") {
  const MapParams& p = cal2();
  BranchSpec beam0 = make_fullbeam_branch({0});
  // the only preimage of zero inside the central beam is zero itself
  Vec z = inverse_branch(Vec{0.0, 0.0}, beam0, p);
  CHECK(norm2(z) == 0.0);
  // through a shifted beam it is that beam's lattice zero
  Vec z2 = inverse_branch(Vec{0.0, 0.0}, make_fullbeam_branch({-3}), p);
  CHECK(z2[0] == doctest::Approx(-6.0));
  CHECK(z2[1] == 0.0);
}

TEST_CASE("dimension three chain goes through end to end") {
  // lambda is larger in dimension three, so feasible start heights sit lower
  const MapParams& p = cal3();
  Vec c{0.0, 0.0, 0.25};
  PeriodicPointResult r = find_periodic(c, 0.05, p);
  CHECK(dist2(r.point, c) <= 0.05);
  CHECK(r.backward_residual < 1e-10);
  CHECK(r.forward_residual < tol_fwd(p, r.period));
  CHECK(check_chain(r.chain, p).ok);
}
