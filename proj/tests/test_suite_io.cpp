#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qrs/io.hpp"

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
}  // namespace

TEST_CASE("expansion check passes on the calibrated map and axis pairs scale by lambda") {
  const MapParams& p = cal2();
  CheckResult r = check_expansion(20000, 2, p);
  CHECK(r.pass);
  CHECK(r.worst_margin >= -kTolSlack);
  // axis pairs below the exponential regime stretch by exactly lambda
  Vec a{0.0, 0.3}, b{0.0, 0.8};
  double ratio = dist2(s_eval(a, p), s_eval(b, p)) / dist2(a, b);
  CHECK(ratio == doctest::Approx(p.lambda).epsilon(1e-12));
  CHECK(ratio >= p.alpha);
}

TEST_CASE("corrupting lambda below the threshold trips the expansion check") {
  MapParams bad = cal2();
  bad.lambda = 0.5 * expansion_threshold(bad.d) / bad.beta_est;
  bad.alpha = bad.lambda * bad.beta_est;
  CheckResult r = check_expansion(5000, 2, bad);
  CHECK(!r.pass);
  SuiteReport rep = run_suite(5000, 2, bad);
  CHECK(!rep.pass);
}

TEST_CASE("boundary, lemma and round-trip checks pass") {
  const MapParams& p = cal2();
  CHECK(check_boundary_maps(20000, 2, p).pass);
  CHECK(check_ball_lemmas(1000, 2, p).pass);
  CHECK(check_roundtrips_and_zeros(2000, 2, p).pass);
}

TEST_CASE("suite is deterministic given the seed") {
  const MapParams& p = cal2();
  SuiteReport a = run_suite(4000, 9, p);
  SuiteReport b = run_suite(4000, 9, p);
  CHECK(a.pass);
  CHECK(to_json(a).dump() == to_json(b).dump());
  SuiteReport c = run_suite(4000, 10, p);
  CHECK(c.pass);
}

TEST_CASE("calibration report serializes and restores") {
  MapParams p;
  CalibrationReport rep = calibrate(2, 1.1, 4000, 1, p);
  json j = to_json(rep);
  CalibrationReport back = calibration_from_json(j);
  CHECK(back.alpha == rep.alpha);
  CHECK(back.lambda == rep.lambda);
  CHECK(back.beta_est == rep.beta_est);
  MapParams p2 = params_from_report(back);
  CHECK(p2.alpha == p.alpha);
  CHECK(p2.d == p.d);
}

TEST_CASE("config parses, serializes, and reports line numbers") {
  std::string text = "d = 3\nmargin=1.25\n# comment\n\nseed=42\ncalib_n=1234\n";
  RunConfig cfg = parse_config(text);
  CHECK(cfg.d == 3);
  CHECK(cfg.margin == 1.25);
  CHECK(cfg.seed == 42);
  CHECK(cfg.calib_n == 1234);

  // round trip is the identity on the full key set
  RunConfig cfg2 = parse_config(serialize_config(cfg));
  CHECK(serialize_config(cfg2) == serialize_config(cfg));

  ConfigError err;
  CHECK_THROWS_AS(parse_config("d=2\nbogus_key=1\n"), domain_error);
  try {
    parse_config("d=2\nbogus_key=1\n", &err);
  } catch (const domain_error&) {
  }
  CHECK(err.line == 2);
  try {
    parse_config("d=2\n\nmargin oops\n", &err);
  } catch (const domain_error&) {
  }
  CHECK(err.line == 3);
  try {
    parse_config("d=banana\n", &err);
  } catch (const domain_error&) {
  }
  CHECK(err.line == 1);
}

TEST_CASE("chain and result records serialize") {
  const MapParams& p = cal2();
  PeriodicPointResult r = find_periodic(Vec{0.0, 0.5}, 0.05, p);
  json j = to_json(r);
  CHECK(j.at("period").get<long long>() == r.period);
  CHECK(j.at("chain").at("balls").size() == r.chain.balls.size());
  CHECK(j.at("chain").at("steps").size() == r.chain.steps.size());
  // identical inputs give byte-identical serializations
  PeriodicPointResult r2 = find_periodic(Vec{0.0, 0.5}, 0.05, p);
  CHECK(to_json(r2).dump() == j.dump());
}

TEST_CASE("calibration cache round trips through the filesystem") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "qrs_cache_test";
  fs::remove_all(dir);
  MapParams p1, p2;
  CalibrationReport a = load_or_calibrate(dir.string(), 2, 1.1, 4000, 1, p1);
  CHECK(fs::exists(dir / cache_file_name(2, 1.1, 4000, 1)));
  CalibrationReport b = load_or_calibrate(dir.string(), 2, 1.1, 4000, 1, p2);
  CHECK(a.beta_est == b.beta_est);
  CHECK(p1.lambda == p2.lambda);
  fs::remove_all(dir);
}
