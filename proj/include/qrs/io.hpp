#pragma once

// JSON serialization for reports, chains and results; the key=value run
// configuration; calibration cache keyed by (d, margin, n, seed).

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <json.hpp>

#include "qrs/calibration.hpp"
#include "qrs/dynamics.hpp"
#include "qrs/invariants.hpp"

namespace qrs {

using json = nlohmann::json;

inline json to_json(const CalibrationReport& r) {
  return json{{"d", r.d},
              {"margin", r.margin},
              {"n", r.n},
              {"seed", r.seed},
              {"beta_est", r.beta_est},
              {"lambda", r.lambda},
              {"alpha", r.alpha},
              {"K_hat", r.K_hat},
              {"K_prime_hat", r.K_prime_hat},
              {"dfnorm_max", r.dfnorm_max}};
}

inline CalibrationReport calibration_from_json(const json& j) {
  CalibrationReport r;
  r.d = j.at("d").get<int>();
  r.margin = j.at("margin").get<double>();
  r.n = j.at("n").get<long long>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.beta_est = j.at("beta_est").get<double>();
  r.lambda = j.at("lambda").get<double>();
  r.alpha = j.at("alpha").get<double>();
  r.K_hat = j.at("K_hat").get<double>();
  r.K_prime_hat = j.at("K_prime_hat").get<double>();
  r.dfnorm_max = j.at("dfnorm_max").get<double>();
  return r;
}

inline MapParams params_from_report(const CalibrationReport& r,
                                    FoldTie tie = FoldTie::TowardEvenLower) {
  MapParams p;
  p.d = r.d;
  p.lambda = r.lambda;
  p.beta_est = r.beta_est;
  p.alpha = r.alpha;
  p.tie = tie;
  p.dfnorm_max = r.dfnorm_max;
  return p;
}

inline json to_json(const BeamIndex& b) { return json{{"r", b.r}, {"sign", b.sign}}; }

inline json to_json(const BranchSpec& br) {
  json j;
  switch (br.kind) {
    case BranchKind::HalfBeam:
      j["kind"] = "half_beam";
      break;
    case BranchKind::AdjacentPair:
      j["kind"] = "adjacent_pair";
      break;
    case BranchKind::FullBeam:
      j["kind"] = "full_beam";
      break;
  }
  j["primary"] = to_json(br.primary);
  if (br.secondary) j["secondary"] = to_json(*br.secondary);
  return j;
}

inline json to_json(const BallChain& chain) {
  json balls = json::array();
  for (const CertifiedBall& b : chain.balls)
    balls.push_back(json{{"center", b.center},
                         {"radius", b.radius},
                         {"domain", to_json(b.domain)},
                         {"clipped", b.clipped}});
  json steps = json::array();
  for (const BranchSpec& s : chain.steps) steps.push_back(to_json(s));
  return json{{"balls", balls}, {"steps", steps}};
}

inline json to_json(const PeriodicPointResult& r, bool with_chain = true) {
  json j{{"point", r.point},
         {"period", r.period},
         {"backward_residual", r.backward_residual},
         {"forward_residual", r.forward_residual}};
  if (with_chain) j["chain"] = to_json(r.chain);
  return j;
}

inline json to_json(const BlowupCertificate& c, bool with_chain = true) {
  json samples = json::array();
  for (const BlowupSample& s : c.samples)
    samples.push_back(json{{"y", s.y}, {"x", s.x}, {"error", s.error}});
  json j{{"k", c.k}, {"m", c.m}, {"max_error", c.max_error}, {"samples", samples}};
  if (with_chain) j["chain"] = to_json(c.chain);
  return j;
}

inline json to_json(const SuiteReport& r) {
  json checks = json::array();
  for (const CheckResult& c : r.checks)
    checks.push_back(json{{"name", c.name},
                          {"samples", c.samples},
                          {"worst_margin", c.worst_margin},
                          {"pass", c.pass}});
  return json{{"seed", r.seed},
              {"params",
               json{{"d", r.params.d},
                    {"lambda", r.params.lambda},
                    {"beta_est", r.params.beta_est},
                    {"alpha", r.params.alpha}}},
              {"checks", checks},
              {"pass", r.pass}};
}

// --- run configuration: plain key=value text ---

struct RunConfig {
  int d = 2;
  double margin = 1.1;
  long long calib_n = 40000;
  std::uint64_t seed = 1;
  double tol_backward = 1e-12;
  double bailout = 1e6;
  long long kmax = 100;
};

struct ConfigError {
  int line = 0;
  std::string message;
};

// Parses completely or reports the first offending line.
inline RunConfig parse_config(const std::string& text, ConfigError* err = nullptr) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& msg) {
    if (err) *err = ConfigError{lineno, msg};
    throw domain_error("config line " + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    std::string t;
    for (char ch : line)
      if (!std::isspace(static_cast<unsigned char>(ch))) t += ch;
    if (t.empty() || t[0] == '#') continue;
    auto eq = t.find('=');
    if (eq == std::string::npos) fail("expected key=value");
    std::string key = t.substr(0, eq);
    std::string val = t.substr(eq + 1);
    try {
      if (key == "d")
        cfg.d = std::stoi(val);
      else if (key == "margin")
        cfg.margin = std::stod(val);
      else if (key == "calib_n")
        cfg.calib_n = std::stoll(val);
      else if (key == "seed")
        cfg.seed = std::stoull(val);
      else if (key == "tol_backward")
        cfg.tol_backward = std::stod(val);
      else if (key == "bailout")
        cfg.bailout = std::stod(val);
      else if (key == "kmax")
        cfg.kmax = std::stoll(val);
      else
        fail("unknown key '" + key + "'");
    } catch (const std::invalid_argument&) {
      fail("bad value for '" + key + "'");
    } catch (const std::out_of_range&) {
      fail("value out of range for '" + key + "'");
    }
  }
  return cfg;
}

inline std::string serialize_config(const RunConfig& cfg) {
  std::ostringstream out;
  out.precision(17);
  out << "bailout=" << cfg.bailout << "\n";
  out << "calib_n=" << cfg.calib_n << "\n";
  out << "d=" << cfg.d << "\n";
  out << "kmax=" << cfg.kmax << "\n";
  out << "margin=" << cfg.margin << "\n";
  out << "seed=" << cfg.seed << "\n";
  out << "tol_backward=" << cfg.tol_backward << "\n";
  return out.str();
}

// --- calibration cache ---

inline std::string cache_file_name(int d, double margin, long long n, std::uint64_t seed) {
  std::ostringstream name;
  name.precision(12);
  name << "cal_d" << d << "_m" << margin << "_n" << n << "_s" << seed << ".json";
  return name.str();
}

inline CalibrationReport load_or_calibrate(const std::string& cache_dir, int d, double margin,
                                           long long n, std::uint64_t seed, MapParams& p) {
  namespace fs = std::filesystem;
  fs::path file;
  if (!cache_dir.empty()) {
    file = fs::path(cache_dir) / cache_file_name(d, margin, n, seed);
    if (fs::exists(file)) {
      std::ifstream in(file);
      json j;
      in >> j;
      CalibrationReport r = calibration_from_json(j);
      if (r.d == d && r.margin == margin && r.n == n && r.seed == seed) {
        p = params_from_report(r);
        return r;
      }
    }
  }
  CalibrationReport r = calibrate(d, margin, n, seed, p);
  if (!cache_dir.empty()) {
    std::error_code ec;
    fs::create_directories(cache_dir, ec);
    if (!ec) {
      std::ofstream out(file);
      out << to_json(r).dump(2) << "\n";
    }
  }
  return r;
}

}  // namespace qrs
