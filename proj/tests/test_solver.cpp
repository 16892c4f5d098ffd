#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qvortex/solver.hpp"

using namespace qvortex;

namespace {

double gaussian(double r, double z) { return std::exp(-(r * r + z * z)); }
double laplace_gaussian(double r, double z) { return (4.0 * (r * r + z * z) - 6.0) * gaussian(r, z); }
double matter_profile(double r, double z) { return 0.8 * std::exp(-0.5 * (r * r + z * z)); }

double vortex_gamma(double r, double z) { return r * r * gaussian(r, z); }
double vortex_curlcurl(double r, double z) {
  const double e = gaussian(r, z);
  const double g_r = (2.0 * r - 2.0 * r * r * r) * e;
  const double g_rr = (2.0 - 10.0 * r * r + 4.0 * std::pow(r, 4)) * e;
  const double g_zz = r * r * (4.0 * z * z - 2.0) * e;
  return -g_rr + g_r / r - g_zz;
}

double max_error(const ScalarField& f, double (*exact)(double, double)) {
  const AxiGrid& g = f.grid();
  double e = 0.0;
  for (int j = 0; j < g.nz(); ++j)
    for (int i = 0; i < g.nr(); ++i) e = std::max(e, std::abs(f(i, j) - exact(g.r(i), g.z(j))));
  return e;
}

// Errors of the manufactured gamma0 (curl = false) or gamma (curl = true) on 32, 64, 128.
std::vector<double> manufactured_errors(bool curl, double q) {
  std::vector<double> errs;
  const double omega = 0.7;
  const int ell = 1;
  for (int n : {32, 64, 128}) {
    const AxiGrid g = AxiGrid::from_extent(n, 2 * n, 6.0, 6.0);
    const ScalarField u = ScalarField::sample(g, matter_profile);
    ScalarField forcing(g);
    for (int j = 0; j < g.nz(); ++j) {
      for (int i = 0; i < g.nr(); ++i) {
        const double r = g.r(i), z = g.z(j), u2 = u(i, j) * u(i, j);
        forcing(i, j) = curl ? 2.0 * vortex_curlcurl(r, z) + q * (ell + q * vortex_gamma(r, z)) * u2
                             : -2.0 * laplace_gaussian(r, z) + q * (omega + q * gaussian(r, z)) * u2;
      }
    }
    const LinearSolveResult res =
        curl ? solve_gamma(u, ell, q, forcing, 1e-10) : solve_gamma0(u, omega, q, forcing, 1e-10);
    EXPECT_TRUE(res.stats.converged) << n;
    errs.push_back(max_error(res.field, curl ? vortex_gamma : gaussian));
  }
  return errs;
}

SolverConfig small_config() {
  SolverConfig c;
  c.nr = 24;
  c.nz = 48;
  c.r_max = 12.0;
  c.z_half = 12.0;
  return c;
}

}  // namespace

TEST(Residuals, VanishOnTrivialState) {
  const AxiGrid g = AxiGrid::from_extent(16, 32, 6.0, 6.0);
  const AnsatzState s{ScalarField(g), ScalarField(g), ScalarField(g), 0.8, 1, 0.3};
  const ResidualNorms n = residual_norms(s, default_potential());
  EXPECT_EQ(n.matter, 0.0);
  EXPECT_EQ(n.gauss, 0.0);
  EXPECT_EQ(n.rotore, 0.0);
}

TEST(Residuals, PointwiseFormulas) {
  const AxiGrid g = AxiGrid::from_extent(16, 32, 6.0, 6.0);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> d(0.1, 1.0);
  ScalarField u(g), g0(g), ga(g);
  for (std::size_t k = 0; k < u.size(); ++k) {
    u[k] = d(rng);
    g0[k] = d(rng);
    ga[k] = d(rng);
  }
  const AnsatzState s(u, g0, ga, 0.6, 2, 0.4);
  const PotentialSpec pot = default_potential();
  const ScalarField m = matter_residual(s, pot), gr = gauss_residual(s), cr = rotore_residual(s);
  const ScalarField lu = laplace_axi(u), lg0 = laplace_axi(g0), cg = curlcurl_theta(ga);
  for (int j = 0; j < g.nz(); ++j) {
    for (int i = 0; i < g.nr(); ++i) {
      const double r = g.r(i), uu = u(i, j);
      const double a = 2.0 + 0.4 * ga(i, j), b = 0.6 + 0.4 * g0(i, j);
      const double em = -lu(i, j) + (a * a / (r * r) - b * b) * uu + evaluate(pot, uu, 1);
      EXPECT_NEAR(m(i, j), em, 1e-12 * (1 + std::abs(em)));
      EXPECT_NEAR(gr(i, j), -2.0 * lg0(i, j) + 0.4 * b * uu * uu, 1e-12);
      EXPECT_NEAR(cr(i, j), 2.0 * cg(i, j) + 0.4 * a * uu * uu, 1e-12);
    }
  }
}

TEST(GaugeSolve, ElectricManufacturedSolutionSecondOrder) {
  for (double q : {0.0, 0.3}) {
    const std::vector<double> e = manufactured_errors(false, q);
    for (std::size_t k = 1; k < e.size(); ++k) {
      const double order = std::log2(e[k - 1] / e[k]);
      EXPECT_GE(order, 1.8) << q;
      EXPECT_LE(order, 2.2) << q;
    }
    EXPECT_LT(e.back(), 2e-3);
  }
}

TEST(GaugeSolve, MagneticManufacturedSolutionSecondOrder) {
  for (double q : {0.0, 0.3}) {
    const std::vector<double> e = manufactured_errors(true, q);
    for (std::size_t k = 1; k < e.size(); ++k) {
      const double order = std::log2(e[k - 1] / e[k]);
      EXPECT_GE(order, 1.8) << q;
      EXPECT_LE(order, 2.2) << q;
    }
    EXPECT_LT(e.back(), 2e-3);
  }
}

TEST(GaugeSolve, SolutionSatisfiesDiscreteEquation) {
  const AxiGrid g = AxiGrid::from_extent(24, 48, 8.0, 8.0);
  const ScalarField u = ScalarField::sample(g, matter_profile);
  const LinearSolveResult g0 = solve_gamma0(u, 0.8, 0.5, 1e-12);
  const LinearSolveResult ga = solve_gamma(u, 1, 0.5, 1e-12);
  ASSERT_TRUE(g0.stats.converged && ga.stats.converged);
  const AnsatzState s(u, g0.field, ga.field, 0.8, 1, 0.5);
  EXPECT_LT(l2_norm(gauss_residual(s)), 1e-10);
  EXPECT_LT(l2_norm(rotore_residual(s)), 1e-10);
  // Screening: the electric potential opposes the frequency and is negative.
  EXPECT_LT(g0.field(0, g.nz() / 2), 0.0);
  EXPECT_LT(ga.field(g.nr() / 4, g.nz() / 2), 0.0);
  EXPECT_THROW(solve_gamma0(u, 0.8, -0.1, 1e-12), std::invalid_argument);
}

TEST(Continuity, ExactForRadialCurrents) {
  const AxiGrid g = AxiGrid::from_extent(32, 64, 8.0, 8.0);
  const ScalarField u = ScalarField::sample(g, matter_profile);
  const ScalarField ga = ScalarField::sample(g, vortex_gamma);
  const AnsatzState trivial(u, ScalarField(g), ScalarField(g), 0.8, 0, 0.0);
  EXPECT_EQ(continuity_residual(trivial), 0.0);
  const AnsatzState vortex(u, ScalarField(g), ga, 0.8, 1, 0.2);
  EXPECT_LT(continuity_residual(vortex, 0.0), 1e-14);
  EXPECT_GT(continuity_residual(vortex), 0.0);
}

TEST(Continuity, SecondOrderDecayOnSmoothState) {
  double prev = 0.0;
  for (int n : {32, 64, 128}) {
    const AxiGrid g = AxiGrid::from_extent(n, 2 * n, 8.0, 8.0);
    const ScalarField u = ScalarField::sample(g, [](double r, double z) { return r * matter_profile(r, z); });
    const AnsatzState s(u, ScalarField(g), ScalarField::sample(g, vortex_gamma), 0.8, 1, 0.2);
    const double c = continuity_residual(s);
    if (prev > 0.0) {
      const double order = std::log2(prev / c);
      EXPECT_GT(order, 1.8) << n;
      EXPECT_LT(order, 2.3) << n;
    }
    prev = c;
  }
}

TEST(Shooting, DefaultSexticGroundState) {
  const std::optional<RadialProfile> p = shoot_qball_1d(default_potential(), 0.8);
  ASSERT_TRUE(p);
  EXPECT_NEAR(p->u0, 0.866974, 1e-5);
  EXPECT_NEAR(p->kappa, 0.6, 1e-12);
  EXPECT_GT(p->rho_match, 10.0);
  // Monotone decreasing, positive, and the ODE holds at interior nodes.
  const PotentialSpec pot = default_potential();
  const double h = p->step;
  for (std::size_t k = 1; k + 1 < p->u.size(); ++k) {
    EXPECT_GT(p->u[k], 0.0);
    EXPECT_LE(p->u[k + 1], p->u[k]);
    if (k % 50 != 0) continue;
    const double rho = k * h;
    const double upp = (p->u[k + 1] - 2.0 * p->u[k] + p->u[k - 1]) / (h * h);
    const double res = -upp - 2.0 * p->du[k] / rho - 0.64 * p->u[k] + evaluate(pot, p->u[k], 1);
    EXPECT_NEAR(res, 0.0, 1e-5) << rho;
  }
  EXPECT_NEAR((*p)(30.0) / (*p)(29.0), (29.0 / 30.0) * std::exp(-0.6), 1e-12);
}

TEST(Shooting, NoGroundStateAboveMass) {
  EXPECT_FALSE(shoot_qball_1d(default_potential(), 1.2));
}

TEST(Pohozaev, RequiresDecoupledStaticCase) {
  const AxiGrid g = AxiGrid::from_extent(16, 32, 6.0, 6.0);
  const ScalarField u = ScalarField::sample(g, matter_profile);
  EXPECT_THROW(pohozaev_check(AnsatzState::matter_only(u, 0.8, 1, 0.0), default_potential()), std::invalid_argument);
  EXPECT_THROW(pohozaev_check(AnsatzState::matter_only(u, 0.8, 0, 0.1), default_potential()), std::invalid_argument);
  EXPECT_FALSE(pohozaev_check(AnsatzState::matter_only(ScalarField(g), 0.8, 0, 0.0), default_potential()));
}

TEST(Pohozaev, ShootingProfileSatisfiesIdentity) {
  const std::optional<RadialProfile> p = shoot_qball_1d(default_potential(), 0.8);
  ASSERT_TRUE(p);
  const AxiGrid g = AxiGrid::from_extent(96, 192, 16.0, 16.0);
  const AnsatzState s = AnsatzState::matter_only(sample_radial_profile(g, *p), 0.8, 0, 0.0);
  const std::optional<double> d = pohozaev_check(s, default_potential());
  ASSERT_TRUE(d);
  EXPECT_LT(*d, 1e-2);
}

TEST(SolverConfig, Validation) {
  auto expect_invalid = [](auto mutate) {
    SolverConfig c;
    mutate(c);
    EXPECT_THROW(c.validate(), std::invalid_argument);
  };
  expect_invalid([](SolverConfig& c) { c.nr = 4; });
  expect_invalid([](SolverConfig& c) { c.r_max = 0.0; });
  expect_invalid([](SolverConfig& c) { c.m_gen = 4; });
  expect_invalid([](SolverConfig& c) { c.mode = SolveMode::FixedCharge; });
  expect_invalid([](SolverConfig& c) { c.q_path = {0.1}; });
  expect_invalid([](SolverConfig& c) { c.q_path = {0.0, 0.2, 0.1}; });
  expect_invalid([](SolverConfig& c) { c.tol_flow = 0.0; });
  expect_invalid([](SolverConfig& c) { c.seed.width = -1.0; });
  SolverConfig c;
  c.potential = Higgs{};
  EXPECT_THROW(solve(c), std::invalid_argument);
}

TEST(Solve, DecoupledQBallConverges) {
  SolverConfig c = small_config();
  const SolveOutcome out = solve(c);
  EXPECT_TRUE(out.report.converged) << out.report.message;
  EXPECT_LE(out.report.residual_matter, c.tol_flow * (1.0 + l2_norm(out.state.u)));
  EXPECT_EQ(l2_norm(out.state.gamma), 0.0);
  EXPECT_EQ(l2_norm(out.state.gamma0), 0.0);
  EXPECT_EQ(out.report.omega_final, 0.8);
  ASSERT_TRUE(out.report.pohozaev_defect);
  EXPECT_GT(out.report.charge, 0.0);
  EXPECT_NEAR(out.report.angular_momentum, 0.0, 1e-12);
}

TEST(Solve, GaussianSeedReachesRequestedFrequency) {
  SolverConfig c = small_config();
  c.shooting_seed = false;
  const SolveOutcome out = solve(c);
  EXPECT_TRUE(out.report.converged) << out.report.message;
  EXPECT_EQ(out.report.omega_final, 0.8);
}

TEST(Solve, FixedChargeHitsTargetWithCoupling) {
  SolverConfig c = small_config();
  c.mode = SolveMode::FixedCharge;
  c.charge_target = 120.0;
  c.q_path = {0.0, 0.05};
  const SolveOutcome out = solve(c);
  ASSERT_TRUE(out.report.converged) << out.report.message;
  EXPECT_NEAR(out.report.charge, 120.0, 1e-6 * 120.0);
  EXPECT_EQ(out.report.q_final, 0.05);
  // l = 0: the magnetic potential stays trivial.
  EXPECT_LT(l2_norm(out.state.gamma), 1e-10);
  EXPECT_GT(out.state.gamma0.max_abs(), 0.0);
  EXPECT_LT(out.report.relative_gauss, 1e-6);
}

TEST(Solve, UnattainableToleranceReportsFailure) {
  SolverConfig c;
  c.nr = 16;
  c.nz = 32;
  c.tol_flow = 1e-30;
  c.max_outer = 20;
  const SolveOutcome out = solve(c);
  EXPECT_FALSE(out.report.converged);
  EXPECT_NE(out.report.message, "converged");
}
