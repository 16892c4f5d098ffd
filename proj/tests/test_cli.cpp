#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "qvortex/io.hpp"

using namespace qvortex;
namespace fs = std::filesystem;

namespace {

const std::string kCli = QVORTEX_CLI_PATH;
const std::string kConfigs = QVORTEX_CONFIG_DIR;

struct CliRun {
  int code = -1;
  std::string out;
};

CliRun run(const std::string& args) {
  const fs::path log = fs::temp_directory_path() / ("qvortex_cli_" + std::to_string(::getpid()) + ".log");
  const std::string cmd = "\"" + kCli + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  CliRun r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  r.out = ss.str();
  fs::remove(log);
  return r;
}

std::string config(const std::string& name) { return "\"" + kConfigs + "/" + name + "\""; }

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("qvortex_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(d);
  return d;
}

Json read_json(const fs::path& p) {
  std::ifstream in(p);
  return Json::parse(in);
}

}  // namespace

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("no-such-command").code, 2);
  EXPECT_EQ(run("solve").code, 2);
  EXPECT_EQ(run("--help").code, 0);
}

TEST(Cli, ValidatePotential) {
  const CliRun ok = run("validate-potential --config " + config("sextic.cfg"));
  EXPECT_EQ(ok.code, 0) << ok.out;
  EXPECT_NE(ok.out.find("\"witness_s0\": 1.0"), std::string::npos) << ok.out;
  EXPECT_NE(ok.out.find("\"witness_s1\": 2.0"), std::string::npos) << ok.out;

  const CliRun higgs = run("validate-potential --config " + config("higgs.cfg"));
  EXPECT_EQ(higgs.code, 1) << higgs.out;
  EXPECT_NE(higgs.out.find("w2"), std::string::npos) << higgs.out;

  EXPECT_EQ(run("validate-potential --config " + config("malformed.cfg")).code, 2);
  EXPECT_EQ(run("validate-potential --config /nonexistent.cfg").code, 2);
}

TEST(Cli, VerifySu2) {
  const CliRun ok = run("verify-su2 --samples 1000 --seed 20240611");
  EXPECT_EQ(ok.code, 0) << ok.out;
  const CliRun strict = run("verify-su2 --samples 200 --s-norm 2 --strict");
  EXPECT_EQ(strict.code, 1) << strict.out;
  EXPECT_NE(strict.out.find("FAIL"), std::string::npos);
  const CliRun lenient = run("verify-su2 --samples 200 --s-norm 2");
  EXPECT_EQ(lenient.code, 0) << lenient.out;
  EXPECT_NE(lenient.out.find("DIFF"), std::string::npos);
  EXPECT_EQ(run("verify-su2 --samples 0").code, 2);
}

TEST(Cli, SolveDecoupledQBall) {
  const fs::path out = fresh_dir("qball");
  const CliRun r = run("solve --config " + config("qball.cfg") + " --out \"" + out.string() + "\"");
  EXPECT_EQ(r.code, 0) << r.out;
  for (const char* f : {"u.csv", "gamma0.csv", "gamma.csv", "report.json"}) EXPECT_TRUE(fs::exists(out / f)) << f;
  const Json rep = read_json(out / "report.json");
  EXPECT_TRUE(rep.at("converged").get<bool>());
  EXPECT_FALSE(rep.at("pohozaev_defect").is_null());
  EXPECT_EQ(rep.at("config_echo").at("omega"), "0.8");
  fs::remove_all(out);
}

TEST(Cli, SolveVortexHasNonzeroMagneticPotential) {
  const fs::path out = fresh_dir("vortex");
  const CliRun r = run("solve --config " + config("vortex.cfg") + " --out \"" + out.string() + "\"");
  EXPECT_EQ(r.code, 0) << r.out;
  const Json rep = read_json(out / "report.json");
  EXPECT_TRUE(rep.at("converged").get<bool>());
  EXPECT_NEAR(rep.at("charge").get<double>(), 150.0, 1e-6);
  const RunConfig rc = load_run_config(kConfigs + "/vortex.cfg");
  std::ifstream in(out / "gamma.csv");
  const ScalarField gamma = read_csv(in, rc.solver.grid());
  EXPECT_GT(gamma.max_abs(), 1e-6);
  fs::remove_all(out);
}

TEST(Cli, SolveUnattainableToleranceWritesPartialArtifacts) {
  const fs::path out = fresh_dir("capped");
  const CliRun r = run("solve --config " + config("unattainable.cfg") + " --out \"" + out.string() + "\"");
  EXPECT_EQ(r.code, 1) << r.out;
  ASSERT_TRUE(fs::exists(out / "report.json"));
  EXPECT_FALSE(read_json(out / "report.json").at("converged").get<bool>());
  EXPECT_TRUE(fs::exists(out / "u.csv"));
  fs::remove_all(out);
}

TEST(Cli, SolveConfigErrors) {
  const fs::path out = fresh_dir("bad");
  EXPECT_EQ(run("solve --config " + config("malformed.cfg") + " --out \"" + out.string() + "\"").code, 2);
  // A Higgs potential fails the hypotheses: a domain failure.
  EXPECT_EQ(run("solve --config " + config("higgs.cfg") + " --out \"" + out.string() + "\"").code, 1);
  fs::remove_all(out);
}

TEST(Cli, NoHiggsDemo) {
  const fs::path out = fresh_dir("scan");
  const CliRun r = run("no-higgs-demo --config " + config("no_higgs.cfg") + " --out \"" + out.string() + "\"");
  EXPECT_EQ(r.code, 0) << r.out;
  const Json s = read_json(out / "summary.json");
  EXPECT_GT(s.at("slope").get<double>(), 0.0);
  EXPECT_LT(s.at("fit_residual").get<double>(), 1e-10);
  std::ifstream csv(out / "scan.csv");
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "Z,I");
  int rows = 0;
  for (std::string line; std::getline(csv, line);) rows += !line.empty();
  EXPECT_EQ(rows, 10);

  EXPECT_EQ(run("no-higgs-demo --ell 1 --q 0.1 --eps 0.01 --r-inner 10 --r-outer 20 --out \"" + out.string() + "\"").code, 0);
  EXPECT_EQ(run("no-higgs-demo --ell 0 --out \"" + out.string() + "\"").code, 2);
  EXPECT_EQ(run("no-higgs-demo --ell 1 --eps 1 --out \"" + out.string() + "\"").code, 2);
  fs::remove_all(out);
}

TEST(Cli, ReduceCheck) {
  const CliRun r = run("reduce-check --config " + config("sextic.cfg") + " --samples 100");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(run("reduce-check --config " + config("higgs.cfg")).code, 2);
}
