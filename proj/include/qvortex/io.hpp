#pragma once

// Run configuration files (flat "key = value" with # comments) and the JSON
// run report.

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qvortex/analysis.hpp"
#include "qvortex/potential.hpp"
#include "qvortex/solver.hpp"

namespace qvortex {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Ordered key/value pairs as read from a file.
using KeyValues = std::vector<std::pair<std::string, std::string>>;

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError("config: '" + key + "' expects a number, got '" + v + "'");
  }
  if (pos != v.size() || !std::isfinite(x)) throw ConfigError("config: '" + key + "' expects a number, got '" + v + "'");
  return x;
}

inline int parse_int(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  long x = 0;
  try {
    x = std::stol(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError("config: '" + key + "' expects an integer, got '" + v + "'");
  }
  if (pos != v.size() || x < -1000000000L || x > 1000000000L)
    throw ConfigError("config: '" + key + "' expects an integer, got '" + v + "'");
  return static_cast<int>(x);
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config: '" + key + "' expects true or false, got '" + v + "'");
}

inline std::vector<double> parse_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, trim(item)));
  if (out.empty()) throw ConfigError("config: '" + key + "' expects a comma-separated list");
  return out;
}

}  // namespace detail

/// Parses "key = value" lines. Blank lines and text after '#' are ignored.
/// Throws ConfigError on lines without '=', empty keys or repeated keys.
inline KeyValues parse_key_values(std::istream& is) {
  KeyValues out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = detail::trim(line.substr(0, eq));
    std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    for (const auto& kv : out)
      if (kv.first == key) throw ConfigError("config line " + std::to_string(lineno) + ": repeated key '" + key + "'");
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

/// Parameters of the nonexistence scan: heights Z are z_count values evenly
/// spaced on [z_cut + (z_max - z_cut) / z_count, z_max].
struct ScanConfig {
  int ell = 1;
  double q = 0.1;
  double eps = 0.01;
  double r_inner = 10.0;
  double r_outer = 20.0;
  double z_cut = 1.0;
  double z_max = 100.0;
  int z_count = 10;

  std::vector<double> z_values() const {
    std::vector<double> z;
    for (int k = 1; k <= z_count; ++k) z.push_back(z_cut + (z_max - z_cut) * k / z_count);
    return z;
  }
};

struct RunConfig {
  SolverConfig solver;
  /// Sampling range and density for validate-potential.
  double s_max = 4.0;
  int n_samples = 4000;
  ScanConfig scan;
  KeyValues echo;
};

/// Builds a RunConfig from parsed pairs; unknown keys and invalid values are
/// ConfigErrors. Potential keys: potential = sextic | higgs | tabulated with
/// m_sq, b, c (sextic), v, lambda (higgs) or table_s, table_f (tabulated).
inline RunConfig parse_run_config(const KeyValues& kv) {
  using namespace detail;
  RunConfig rc;
  rc.echo = kv;
  SolverConfig& s = rc.solver;
  std::string family = "sextic";
  Sextic sextic;
  Higgs higgs;
  std::vector<double> table_s, table_f;

  for (const auto& [key, v] : kv) {
    if (key == "potential") {
      family = v;
    } else if (key == "m_sq") {
      sextic.m_sq = parse_double(key, v);
    } else if (key == "b") {
      sextic.b = parse_double(key, v);
    } else if (key == "c") {
      sextic.c = parse_double(key, v);
    } else if (key == "v") {
      higgs.v = parse_double(key, v);
    } else if (key == "lambda") {
      higgs.lambda = parse_double(key, v);
    } else if (key == "table_s") {
      table_s = parse_list(key, v);
    } else if (key == "table_f") {
      table_f = parse_list(key, v);
    } else if (key == "nr") {
      s.nr = parse_int(key, v);
    } else if (key == "nz") {
      s.nz = parse_int(key, v);
    } else if (key == "r_max") {
      s.r_max = parse_double(key, v);
    } else if (key == "z_half") {
      s.z_half = parse_double(key, v);
    } else if (key == "ell") {
      s.ell = parse_int(key, v);
      rc.scan.ell = s.ell;
    } else if (key == "m_gen") {
      s.m_gen = parse_int(key, v);
    } else if (key == "mode") {
      if (v == "fixed_omega") {
        s.mode = SolveMode::FixedOmega;
      } else if (v == "fixed_charge") {
        s.mode = SolveMode::FixedCharge;
      } else {
        throw ConfigError("config: mode must be fixed_omega or fixed_charge");
      }
    } else if (key == "omega") {
      s.omega = parse_double(key, v);
    } else if (key == "charge_target") {
      s.charge_target = parse_double(key, v);
    } else if (key == "q_path") {
      s.q_path = parse_list(key, v);
    } else if (key == "tol_gauge") {
      s.tol_gauge = parse_double(key, v);
    } else if (key == "tol_flow") {
      s.tol_flow = parse_double(key, v);
    } else if (key == "max_outer") {
      s.max_outer = parse_int(key, v);
    } else if (key == "step_size") {
      s.step_size = parse_double(key, v);
    } else if (key == "seed_amplitude") {
      s.seed.amplitude = parse_double(key, v);
    } else if (key == "seed_width") {
      s.seed.width = parse_double(key, v);
    } else if (key == "newton_switch") {
      s.newton_switch = parse_double(key, v);
    } else if (key == "max_krylov") {
      s.max_krylov = parse_int(key, v);
    } else if (key == "min_q_step") {
      s.min_q_step = parse_double(key, v);
    } else if (key == "shooting_seed") {
      s.shooting_seed = parse_bool(key, v);
    } else if (key == "s_max") {
      rc.s_max = parse_double(key, v);
    } else if (key == "n_samples") {
      rc.n_samples = parse_int(key, v);
    } else if (key == "scan_q") {
      rc.scan.q = parse_double(key, v);
    } else if (key == "scan_eps") {
      rc.scan.eps = parse_double(key, v);
    } else if (key == "scan_r_inner") {
      rc.scan.r_inner = parse_double(key, v);
    } else if (key == "scan_r_outer") {
      rc.scan.r_outer = parse_double(key, v);
    } else if (key == "scan_z_cut") {
      rc.scan.z_cut = parse_double(key, v);
    } else if (key == "scan_z_max") {
      rc.scan.z_max = parse_double(key, v);
    } else if (key == "scan_z_count") {
      rc.scan.z_count = parse_int(key, v);
    } else {
      throw ConfigError("config: unknown key '" + key + "'");
    }
  }

  try {
    if (family == "sextic") {
      s.potential = sextic;
    } else if (family == "higgs") {
      s.potential = higgs;
    } else if (family == "tabulated") {
      s.potential = Tabulated(table_s, table_f);
    } else {
      throw ConfigError("config: potential must be sextic, higgs or tabulated");
    }
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!(rc.s_max > 0.0)) throw ConfigError("config: s_max must be > 0");
  if (rc.n_samples < 100) throw ConfigError("config: n_samples must be >= 100");
  if (rc.scan.z_count < 2) throw ConfigError("config: scan_z_count must be >= 2");
  return rc;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  return parse_run_config(parse_key_values(in));
}

// ---------------------------------------------------------------------------
// JSON

using Json = nlohmann::ordered_json;

inline Json to_json(const EnergyBreakdown& e) {
  return Json{{"grad_u", e.grad_u},
              {"omega_term", e.omega_term},
              {"gamma0_term", e.gamma0_term},
              {"vortex_term", e.vortex_term},
              {"potential_term", e.potential_term},
              {"grad_gamma0_term", e.grad_gamma0_term},
              {"curl_gamma_term", e.curl_gamma_term},
              {"total", e.total}};
}

inline EnergyBreakdown energy_from_json(const Json& j) {
  EnergyBreakdown e;
  e.grad_u = j.at("grad_u").get<double>();
  e.omega_term = j.at("omega_term").get<double>();
  e.gamma0_term = j.at("gamma0_term").get<double>();
  e.vortex_term = j.at("vortex_term").get<double>();
  e.potential_term = j.at("potential_term").get<double>();
  e.grad_gamma0_term = j.at("grad_gamma0_term").get<double>();
  e.curl_gamma_term = j.at("curl_gamma_term").get<double>();
  e.total = j.at("total").get<double>();
  return e;
}

inline Json to_json(const SolveReport& r, const KeyValues& echo) {
  Json cfg = Json::object();
  for (const auto& [k, v] : echo) cfg[k] = v;
  Json j;
  j["residuals"] = Json{{"matter", r.residual_matter},
                        {"gauss", r.residual_gauss},
                        {"rotore", r.residual_rotore},
                        {"matter_relative", r.relative_matter},
                        {"gauss_relative", r.relative_gauss},
                        {"rotore_relative", r.relative_rotore}};
  j["energy"] = to_json(r.energy);
  j["charge"] = r.charge;
  j["angular_momentum"] = r.angular_momentum;
  j["omega"] = r.omega_final;
  j["converged"] = r.converged;
  j["config_echo"] = cfg;
  j["iterations"] = r.iterations;
  j["q_final"] = r.q_final;
  j["pohozaev_defect"] = r.pohozaev_defect ? Json(*r.pohozaev_defect) : Json(nullptr);
  j["message"] = r.message;
  return j;
}

inline SolveReport report_from_json(const Json& j) {
  SolveReport r;
  const Json& res = j.at("residuals");
  r.residual_matter = res.at("matter").get<double>();
  r.residual_gauss = res.at("gauss").get<double>();
  r.residual_rotore = res.at("rotore").get<double>();
  r.relative_matter = res.at("matter_relative").get<double>();
  r.relative_gauss = res.at("gauss_relative").get<double>();
  r.relative_rotore = res.at("rotore_relative").get<double>();
  r.energy = energy_from_json(j.at("energy"));
  r.charge = j.at("charge").get<double>();
  r.angular_momentum = j.at("angular_momentum").get<double>();
  r.omega_final = j.at("omega").get<double>();
  r.converged = j.at("converged").get<bool>();
  r.iterations = j.at("iterations").get<int>();
  r.q_final = j.at("q_final").get<double>();
  if (!j.at("pohozaev_defect").is_null()) r.pohozaev_defect = j.at("pohozaev_defect").get<double>();
  r.message = j.at("message").get<std::string>();
  return r;
}

inline Json to_json(const HypothesisReport& h) {
  auto opt = [](const std::optional<double>& x) { return x ? Json(*x) : Json(nullptr); };
  return Json{{"w1_ok", h.w1_ok},
              {"w2_ok", h.w2_ok},
              {"w3_ok", h.w3_ok},
              {"w4_ok", h.w4_ok},
              {"witness_s0", opt(h.witness_s0)},
              {"witness_s1", opt(h.witness_s1)},
              {"failure_location", opt(h.failure_location)},
              {"m_sq", h.m_sq},
              {"all_ok", h.all_ok()}};
}

inline Json to_json(const DivergenceScan& s) {
  return Json{{"ell", s.ell},
              {"q", s.q},
              {"eps", s.eps},
              {"r_inner", s.r_inner},
              {"r_outer", s.r_outer},
              {"z_cut", s.z_cut},
              {"slope", s.slope},
              {"intercept", s.intercept},
              {"fit_residual", s.fit_residual}};
}

}  // namespace qvortex
