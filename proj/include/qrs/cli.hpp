#pragma once

// Command-line surface. Subcommands: calibrate, eval, orbit, render,
// periodic, blowup, selftest. JSON results go to stdout (or --out); a short
// human-readable summary goes to stderr. Exit status 0 on success, 1 on an
// algorithm/numerical failure (diagnostic JSON emitted), 2 on usage errors.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qrs/io.hpp"
#include "qrs/render.hpp"

namespace qrs {

namespace detail {
// comma- or space-separated decimal literals
inline Vec parse_coords(const std::string& text) {
  Vec out;
  std::string t = text;
  for (char& c : t)
    if (c == ',') c = ' ';
  std::istringstream in(t);
  double v;
  while (in >> v) out.push_back(v);
  if (!in.eof()) throw domain_error("could not parse coordinate list '" + text + "'");
  return out;
}

struct BallArg {
  Vec center;
  double radius;
};

inline BallArg parse_ball(const std::string& text) {
  Vec v = parse_coords(text);
  if (v.size() < 3) throw domain_error("--ball needs center coordinates plus a radius");
  BallArg b;
  b.center.assign(v.begin(), v.end() - 1);
  b.radius = v.back();
  if (!(b.radius > 0.0)) throw domain_error("--ball radius must be positive");
  return b;
}

inline void emit(const json& j, const std::string& out_path, std::ostream& out) {
  if (out_path.empty()) {
    out << j.dump(2) << "\n";
  } else {
    std::ofstream f(out_path);
    if (!f) throw domain_error("cannot open output file '" + out_path + "'");
    f << j.dump(2) << "\n";
  }
}
}  // namespace detail

inline int cli_main(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"quasiregular sine map toolkit"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  RunConfig cfg;
  std::string config_path;
  std::string cache_dir = ".qrs-cache";
  std::string out_path;
  app.add_option("--config", config_path, "key=value configuration file");
  app.add_option("--cache-dir", cache_dir, "calibration cache directory ('' disables)");
  app.add_option("--out", out_path, "write JSON result to this file instead of stdout");

  int opt_d = 0;
  long long opt_n = 0;
  double opt_margin = 0.0;
  std::uint64_t opt_seed = 0;
  bool have_seed = false;
  app.add_option("--d", opt_d, "ambient dimension (>= 2)");
  app.add_option("--n", opt_n, "calibration sample count");
  app.add_option("--margin", opt_margin, "expansion margin (> 1)");
  app.add_option_function<std::uint64_t>(
      "--seed", [&](std::uint64_t v) { opt_seed = v; have_seed = true; }, "random seed");

  auto* cal = app.add_subcommand("calibrate", "estimate beta, choose lambda, report distortion");

  auto* eval = app.add_subcommand("eval", "evaluate the map at a point");
  std::vector<std::string> eval_coords;
  bool eval_json = false;
  eval->add_option("coords", eval_coords, "point coordinates")->required();
  eval->add_flag("--json", eval_json, "emit JSON instead of plain coordinates");

  auto* orb = app.add_subcommand("orbit", "forward orbit of a point");
  std::string orbit_x;
  long long orbit_kmax = 0;
  double orbit_bailout = 0.0;
  orb->add_option("--x", orbit_x, "start point, comma separated")->required();
  orb->add_option("--kmax", orbit_kmax, "max iterations");
  orb->add_option("--bailout", orbit_bailout, "escape radius");

  auto* rend = app.add_subcommand("render", "escape-time slice to a P6 image");
  std::string rend_origin, rend_axis_u, rend_axis_v, rend_out = "slice.ppm";
  int rend_w = 512, rend_h = 512, rend_threads = 1;
  double rend_scale = 0.01, rend_bailout = 0.0;
  long long rend_kmax = 64;
  rend->add_option("--origin", rend_origin, "slice origin (defaults to 0)");
  rend->add_option("--axis-u", rend_axis_u, "first axis (defaults to e_1)");
  rend->add_option("--axis-v", rend_axis_v, "second axis (defaults to e_d)");
  rend->add_option("--width", rend_w, "pixels");
  rend->add_option("--height", rend_h, "pixels");
  rend->add_option("--scale", rend_scale, "units per pixel");
  rend->add_option("--kmax", rend_kmax, "max iterations per pixel");
  rend->add_option("--bailout", rend_bailout, "escape radius");
  rend->add_option("--threads", rend_threads, "worker count (output is identical for any value)");
  rend->add_option("--image", rend_out, "output PPM path");

  auto* per = app.add_subcommand("periodic", "periodic point in a ball, with certificate chain");
  std::string per_ball;
  double per_tol = 0.0;
  per->add_option("--ball", per_ball, "center coordinates and radius, comma separated")
      ->required();
  per->add_option("--tol", per_tol, "contraction stopping tolerance");

  auto* blow = app.add_subcommand("blowup", "certify that iterates of a ball cover B(0,R)");
  std::string blow_ball;
  double blow_R = 10.0;
  blow->add_option("--ball", blow_ball, "center coordinates and radius, comma separated")
      ->required();
  blow->add_option("--R", blow_R, "target radius");

  auto* self = app.add_subcommand("selftest", "run the invariant suite");
  long long self_n = 100000;
  double self_lambda = 0.0;
  self->add_option("--checks-n", self_n, "sample count per check");
  self->add_option("--lambda", self_lambda, "diagnostic override of lambda (skips calibration)");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    out << app.help() << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      if (!f) throw domain_error("cannot open config file '" + config_path + "'");
      std::stringstream ss;
      ss << f.rdbuf();
      cfg = parse_config(ss.str());
    }
    if (opt_d) cfg.d = opt_d;
    if (opt_n) cfg.calib_n = opt_n;
    if (opt_margin != 0.0) cfg.margin = opt_margin;
    if (have_seed) cfg.seed = opt_seed;
    if (cfg.d < 2) throw domain_error("dimension must be at least 2");

    auto calibrated = [&](MapParams& p) {
      return load_or_calibrate(cache_dir, cfg.d, cfg.margin, cfg.calib_n, cfg.seed, p);
    };

    if (*cal) {
      MapParams p;
      CalibrationReport rep = calibrated(p);
      detail::emit(to_json(rep), out_path, out);
      err << "calibrated d=" << rep.d << ": beta=" << rep.beta_est << " lambda=" << rep.lambda
          << " alpha=" << rep.alpha << "\n";
      return 0;
    }
    if (*eval) {
      std::string joined;
      for (const std::string& s : eval_coords) joined += s + " ";
      Vec x = detail::parse_coords(joined);
      if (static_cast<int>(x.size()) != cfg.d) {
        err << "usage error: expected " << cfg.d << " coordinates, got " << x.size() << "\n";
        return 2;
      }
      MapParams p;
      calibrated(p);
      Vec y = s_eval(x, p);
      if (eval_json) {
        detail::emit(json{{"x", x}, {"S", y}}, out_path, out);
      } else {
        std::ostringstream line;
        line.precision(17);
        for (std::size_t i = 0; i < y.size(); ++i) line << (i ? " " : "") << y[i];
        out << line.str() << "\n";
      }
      return 0;
    }
    if (*orb) {
      Vec x = detail::parse_coords(orbit_x);
      if (static_cast<int>(x.size()) != cfg.d) {
        err << "usage error: expected " << cfg.d << " coordinates\n";
        return 2;
      }
      MapParams p;
      calibrated(p);
      long long kmax = orbit_kmax > 0 ? orbit_kmax : cfg.kmax;
      double bailout = orbit_bailout > 0.0 ? orbit_bailout : cfg.bailout;
      OrbitResult r = orbit(x, kmax, bailout, p);
      json pts = json::array();
      for (const Vec& q : r.points) pts.push_back(q);
      detail::emit(json{{"points", pts}, {"overflowed", r.overflowed}}, out_path, out);
      err << "orbit length " << r.points.size() << (r.overflowed ? " (overflowed)" : "") << "\n";
      return 0;
    }
    if (*rend) {
      MapParams p;
      calibrated(p);
      SliceSpec s;
      s.origin = rend_origin.empty() ? Vec(cfg.d, 0.0) : detail::parse_coords(rend_origin);
      if (rend_axis_u.empty()) {
        s.axis_u = Vec(cfg.d, 0.0);
        s.axis_u[0] = 1.0;
      } else {
        s.axis_u = detail::parse_coords(rend_axis_u);
      }
      if (rend_axis_v.empty()) {
        s.axis_v = Vec(cfg.d, 0.0);
        s.axis_v[cfg.d - 1] = 1.0;
      } else {
        s.axis_v = detail::parse_coords(rend_axis_v);
      }
      s.width = rend_w;
      s.height = rend_h;
      s.scale = rend_scale;
      s.kmax = rend_kmax;
      s.bailout = rend_bailout > 0.0 ? rend_bailout : cfg.bailout;
      auto img = render_slice(s, p, rend_threads);
      write_ppm(rend_out, img, s.width, s.height);
      detail::emit(json{{"image", rend_out},
                        {"width", s.width},
                        {"height", s.height},
                        {"kmax", s.kmax},
                        {"threads", rend_threads}},
                   out_path, out);
      err << "wrote " << rend_out << "\n";
      return 0;
    }
    if (*per) {
      detail::BallArg b = detail::parse_ball(per_ball);
      if (static_cast<int>(b.center.size()) != cfg.d) {
        err << "usage error: ball center needs " << cfg.d << " coordinates\n";
        return 2;
      }
      MapParams p;
      calibrated(p);
      double tol = per_tol > 0.0 ? per_tol : cfg.tol_backward;
      BranchSpec t0 = make_halfbeam_branch(BeamIndex{std::vector<long long>(cfg.d - 1, 0), +1});
      json j;
      if (dist_to_branch_boundary(b.center, t0) >= b.radius + 1e-9) {
        PeriodicPointResult r = find_periodic(b.center, b.radius, p, tol);
        j = to_json(r);
        err << "period " << r.period << ", backward residual " << r.backward_residual << "\n";
      } else {
        ProbeResult r = probe_density(b.center, b.radius, 0, p, cfg.kmax, cfg.bailout, cfg.seed);
        j = to_json(r.periodic);
        j["seed_point"] = r.seed_point;
        j["push_steps"] = r.push_steps;
        err << "period " << r.periodic.period << ", backward residual "
            << r.periodic.backward_residual << "\n";
      }
      detail::emit(j, out_path, out);
      return 0;
    }
    if (*blow) {
      detail::BallArg b = detail::parse_ball(blow_ball);
      if (static_cast<int>(b.center.size()) != cfg.d) {
        err << "usage error: ball center needs " << cfg.d << " coordinates\n";
        return 2;
      }
      MapParams p;
      calibrated(p);
      BlowupCertificate c = certify_blowup(b.center, b.radius, blow_R, p);
      detail::emit(to_json(c), out_path, out);
      err << "k=" << c.k << " max sample error " << c.max_error << "\n";
      return c.max_error < 1e-6 ? 0 : 1;
    }
    if (*self) {
      MapParams p;
      if (self_lambda > 0.0) {
        // diagnostic override: uses the given lambda with a freshly estimated
        // beta, bypassing the margin rule
        MapParams base;
        base.d = cfg.d;
        double beta = estimate_beta(cfg.calib_n, cfg.seed, base);
        p = base;
        p.beta_est = beta;
        p.lambda = self_lambda;
        p.alpha = self_lambda * beta;
        p.dfnorm_max = 3.0;
      } else {
        calibrated(p);
      }
      SuiteReport rep = run_suite(self_n, cfg.seed, p);
      detail::emit(to_json(rep), out_path, out);
      for (const CheckResult& c : rep.checks)
        err << (c.pass ? "pass " : "FAIL ") << c.name << " (worst margin " << c.worst_margin
            << ")\n";
      return rep.pass ? 0 : 1;
    }
  } catch (const domain_error& e) {
    err << "error: " << e.what() << "\n";
    detail::emit(json{{"error", e.what()}, {"kind", "domain"}}, out_path, out);
    return 1;
  } catch (const branch_domain_error& e) {
    err << "error: " << e.what() << "\n";
    detail::emit(json{{"error", e.what()}, {"kind", "branch_domain"}}, out_path, out);
    return 1;
  } catch (const algorithm_error& e) {
    err << "error: " << e.what() << "\n";
    detail::emit(json{{"error", e.what()}, {"kind", "algorithm"}}, out_path, out);
    return 1;
  } catch (const numerical_error& e) {
    err << "error: " << e.what() << "\n";
    detail::emit(json{{"error", e.what()}, {"kind", "numerical"}}, out_path, out);
    return 1;
  }
  return 2;
}

inline int cli_main(int argc, char** argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return cli_main(std::move(args), out, err);
}

}  // namespace qrs
