// qvortex: batch front-end for the gauged Q-ball / vortex solver.
//
//   qvortex validate-potential --config run.cfg
//   qvortex verify-su2 [--samples N] [--seed S] [--strict] [--s-norm X] [--terms K]
//   qvortex solve --config run.cfg --out dir
//   qvortex no-higgs-demo [--config run.cfg] [--ell L --q Q --eps E ...] --out dir
//   qvortex reduce-check --config run.cfg [--samples N] [--seed S]
//
// Exit codes: 0 success, 1 domain failure, 2 usage or configuration error.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qvortex/analysis.hpp"
#include "qvortex/io.hpp"
#include "qvortex/verification.hpp"

namespace fs = std::filesystem;
using namespace qvortex;

namespace {

constexpr int kOk = 0;
constexpr int kDomainFailure = 1;
constexpr int kUsageError = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw UsageError("cannot create output directory '" + dir + "': " + ec.message());
}

void write_field(const fs::path& path, const ScalarField& f) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  write_csv(os, f);
}

void write_json(const fs::path& path, const Json& j) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << j.dump(2) << '\n';
}

int cmd_validate_potential(const std::string& config) {
  const RunConfig rc = load_run_config(config);
  const PotentialSpec& pot = rc.solver.potential;
  const HypothesisReport rep = validate_hypotheses(pot, rc.s_max, rc.n_samples);
  Json j;
  j["family"] = family_name(pot);
  j["hypotheses"] = to_json(rep);
  const HiggsDetection det = is_higgs_type(pot, rc.s_max);
  j["higgs_type"] = det.is_higgs;
  j["s_bar"] = det.s_bar ? Json(*det.s_bar) : Json(nullptr);
  std::cout << j.dump(2) << '\n';
  if (!rep.all_ok()) {
    const char* names[] = {"w1", "w2", "w3", "w4"};
    const bool oks[] = {rep.w1_ok, rep.w2_ok, rep.w3_ok, rep.w4_ok};
    for (int k = 0; k < 4; ++k)
      if (!oks[k]) std::cerr << "hypothesis " << names[k] << " fails\n";
    return kDomainFailure;
  }
  return kOk;
}

struct VerifyOptions {
  int samples = 1000;
  std::uint64_t seed = 20240611;
  bool strict = false;
  double s_norm = 1.0;
  int terms = 60;
};

int cmd_verify_su2(const VerifyOptions& o) {
  if (o.samples < 1) throw UsageError("--samples must be >= 1");
  if (!(o.s_norm > 0.0)) throw UsageError("--s-norm must be > 0");
  if (o.terms < 1) throw UsageError("--terms must be >= 1");

  std::mt19937_64 rng(o.seed);
  const PotentialSpec pot = default_potential();
  struct Row {
    SuiteResult r;
    bool counts;
  };
  std::vector<Row> rows;
  rows.push_back({suite_transport_fd(rng, o.samples, TransportVariant::PaperConstants, o.s_norm), o.strict});
  rows.push_back({suite_transport_fd_range(rng, o.samples, TransportVariant::GeneralCoefficients, 3.0), true});
  rows.push_back({suite_transport_series(rng, o.samples, o.terms, 3.0), true});
  rows.push_back({suite_single_generator(rng, o.samples), true});
  const int n_momenta = std::max(1, o.samples / 2);
  rows.push_back({suite_momenta(rng, n_momenta, TransportVariant::PaperConstants), true});
  rows.push_back({suite_momenta(rng, n_momenta, TransportVariant::GeneralCoefficients), true});
  rows.push_back({suite_legendre(rng, n_momenta, TransportVariant::PaperConstants, pot), true});
  rows.push_back({suite_legendre(rng, n_momenta, TransportVariant::GeneralCoefficients, pot), true});

  bool ok = true;
  std::cout << std::left << std::setw(26) << "suite" << std::setw(9) << "samples" << std::setw(13) << "worst"
            << std::setw(10) << "tol" << "status\n";
  for (const auto& [r, counts] : rows) {
    const char* status = r.passed() ? "PASS" : (counts ? "FAIL" : "DIFF");
    std::cout << std::left << std::setw(26) << r.name << std::setw(9) << r.samples << std::setw(13)
              << std::setprecision(3) << std::scientific << r.worst << std::setw(10) << r.tolerance
              << std::defaultfloat << status << '\n';
    if (!r.passed()) {
      std::cout << "  " << r.failures << " failing; first: " << r.first_failure << '\n';
      if (counts) ok = false;
    }
  }
  std::cout << "seed " << o.seed << '\n';
  return ok ? kOk : kDomainFailure;
}

int cmd_solve(const std::string& config, const std::string& out) {
  const RunConfig rc = load_run_config(config);
  ensure_dir(out);
  std::optional<SolveOutcome> outcome;
  try {
    outcome = solve(rc.solver);
  } catch (const std::invalid_argument& e) {
    std::cerr << "solve: " << e.what() << '\n';
    return kDomainFailure;
  }
  const SolveOutcome& result = *outcome;
  const fs::path dir(out);
  write_field(dir / "u.csv", result.state.u);
  write_field(dir / "gamma0.csv", result.state.gamma0);
  write_field(dir / "gamma.csv", result.state.gamma);
  write_json(dir / "report.json", to_json(result.report, rc.echo));
  const SolveReport& r = result.report;
  std::cout << (r.converged ? "converged" : "not converged") << ": " << r.message << '\n'
            << std::setprecision(10) << "energy " << r.energy.total << "  charge " << r.charge << "  omega "
            << r.omega_final << "  q " << r.q_final << '\n';
  return r.converged ? kOk : kDomainFailure;
}

struct DemoOptions {
  std::string config;
  std::string out = ".";
  ScanConfig scan;
  double fit_threshold = 1e-10;
};

int cmd_no_higgs_demo(DemoOptions o, const CLI::App& sub) {
  if (!o.config.empty()) {
    // Config supplies defaults; explicit flags win.
    const ScanConfig from_file = load_run_config(o.config).scan;
    auto pick = [&](const char* flag, auto& field, const auto& value) {
      if (sub.count(flag) == 0) field = value;
    };
    pick("--ell", o.scan.ell, from_file.ell);
    pick("--q", o.scan.q, from_file.q);
    pick("--eps", o.scan.eps, from_file.eps);
    pick("--r-inner", o.scan.r_inner, from_file.r_inner);
    pick("--r-outer", o.scan.r_outer, from_file.r_outer);
    pick("--z-cut", o.scan.z_cut, from_file.z_cut);
    pick("--z-max", o.scan.z_max, from_file.z_max);
    pick("--z-count", o.scan.z_count, from_file.z_count);
  }
  if (o.scan.z_count < 2) throw UsageError("--z-count must be >= 2");
  DivergenceScan scan;
  try {
    scan = no_higgs_divergence_scan(o.scan.ell, o.scan.q, o.scan.eps, o.scan.r_inner, o.scan.r_outer,
                                    o.scan.z_cut, o.scan.z_values());
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  ensure_dir(o.out);
  const fs::path dir(o.out);
  {
    std::ofstream os(dir / "scan.csv");
    if (!os) throw std::runtime_error("cannot write scan.csv");
    os << "Z,I\n" << std::setprecision(17);
    for (std::size_t k = 0; k < scan.z_values.size(); ++k) os << scan.z_values[k] << ',' << scan.integrals[k] << '\n';
  }
  Json j = to_json(scan);
  const bool ok = scan.slope > 0.0 && scan.fit_residual < o.fit_threshold;
  j["fit_threshold"] = o.fit_threshold;
  j["linear_growth"] = ok;
  write_json(dir / "summary.json", j);
  std::cout << std::setprecision(10) << "slope " << scan.slope << "  intercept " << scan.intercept
            << "  fit residual " << scan.fit_residual << '\n';
  return ok ? kOk : kDomainFailure;
}

// Random non-solution state: positive u, arbitrary gauge fields.
AnsatzState random_state(const AxiGrid& g, std::mt19937_64& rng, int ell, double omega, double q) {
  std::uniform_real_distribution<double> pos(0.0, 1.5);
  std::uniform_real_distribution<double> sym(-1.0, 1.0);
  ScalarField u(g), g0(g), ga(g);
  for (std::size_t k = 0; k < g.size(); ++k) {
    u[k] = pos(rng);
    g0[k] = sym(rng);
    ga[k] = sym(rng);
  }
  return AnsatzState(u, g0, ga, omega, ell, q);
}

int cmd_reduce_check(const std::string& config, int samples, std::uint64_t seed, double threshold) {
  if (samples < 1) throw UsageError("--samples must be >= 1");
  const RunConfig rc = load_run_config(config);
  const SolverConfig& s = rc.solver;
  if (std::holds_alternative<Higgs>(s.potential)) throw UsageError("reduce-check needs a non-Higgs potential");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coupling(0.0, 1.0);
  const AxiGrid g = s.grid();
  double worst = 0.0;
  for (int k = 0; k < samples; ++k) {
    const AnsatzState st = random_state(g, rng, s.ell, s.omega, coupling(rng));
    worst = std::max(worst, reduction_residual_gap(make_reduction_pair(st), s.potential));
  }
  std::cout << std::setprecision(3) << std::scientific << "reduction gap: worst " << worst << " over " << samples
            << " states (threshold " << threshold << ")\n";
  return worst < threshold ? kOk : kDomainFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SU(2) gauged Q-ball and vortex solver"};
  app.require_subcommand(1);

  std::string config;
  std::string out = ".";

  auto* vp = app.add_subcommand("validate-potential", "check the potential hypotheses");
  vp->add_option("--config", config, "run configuration")->required();

  VerifyOptions vo;
  auto* vs = app.add_subcommand("verify-su2", "randomised transport and Legendre suites");
  vs->add_option("--samples", vo.samples, "samples per suite");
  vs->add_option("--seed", vo.seed, "RNG seed");
  vs->add_flag("--strict", vo.strict, "count the constant-coefficient transport discrepancy as a failure");
  vs->add_option("--s-norm", vo.s_norm, "|S| for the constant-coefficient suite");
  vs->add_option("--terms", vo.terms, "terms of the ad-series oracle");

  auto* so = app.add_subcommand("solve", "solve the coupled ansatz equations");
  so->add_option("--config", config, "run configuration")->required();
  so->add_option("--out", out, "output directory");

  DemoOptions dopt;
  auto* nh = app.add_subcommand("no-higgs-demo", "lower-bound integral growth in the Higgs-type setting");
  nh->add_option("--config", dopt.config, "run configuration supplying scan_* defaults");
  nh->add_option("--out", dopt.out, "output directory");
  nh->add_option("--ell", dopt.scan.ell);
  nh->add_option("--q", dopt.scan.q);
  nh->add_option("--eps", dopt.scan.eps);
  nh->add_option("--r-inner", dopt.scan.r_inner);
  nh->add_option("--r-outer", dopt.scan.r_outer);
  nh->add_option("--z-cut", dopt.scan.z_cut);
  nh->add_option("--z-max", dopt.scan.z_max);
  nh->add_option("--z-count", dopt.scan.z_count);
  nh->add_option("--fit-threshold", dopt.fit_threshold);

  int rc_samples = 100;
  std::uint64_t rc_seed = 7;
  double rc_threshold = 1e-12;
  auto* rcmd = app.add_subcommand("reduce-check", "residual gap of the Abelian reduction on random states");
  rcmd->add_option("--config", config, "run configuration")->required();
  rcmd->add_option("--samples", rc_samples);
  rcmd->add_option("--seed", rc_seed);
  rcmd->add_option("--threshold", rc_threshold);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    if (*vp) return cmd_validate_potential(config);
    if (*vs) return cmd_verify_su2(vo);
    if (*so) return cmd_solve(config, out);
    if (*nh) return cmd_no_higgs_demo(dopt, *nh);
    if (*rcmd) return cmd_reduce_check(config, rc_samples, rc_seed, rc_threshold);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << '\n';
    return kUsageError;
  } catch (const UsageError& e) {
    std::cerr << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDomainFailure;
  }
  return kUsageError;
}
