#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "qvortex/axigrid.hpp"

using namespace qvortex;

namespace {

constexpr double kPi = std::numbers::pi;

double gaussian(double r, double z) { return std::exp(-(r * r + z * z)); }

// gamma = r^2 exp(-r^2 - z^2) and its curl-curl coefficient
// -gamma_rr + gamma_r / r - gamma_zz, expanded by hand.
double vortex_gamma(double r, double z) { return r * r * gaussian(r, z); }
double vortex_curlcurl(double r, double z) {
  const double e = gaussian(r, z);
  const double g_r = (2.0 * r - 2.0 * r * r * r) * e;
  const double g_rr = (2.0 - 10.0 * r * r + 4.0 * std::pow(r, 4)) * e;
  const double g_zz = r * r * (4.0 * z * z - 2.0) * e;
  return -g_rr + g_r / r - g_zz;
}

// r times the theta component of curl curl A for A = gamma(r, z) grad(theta),
// by nested central differences of the Cartesian components at (x, 0, z).
double cartesian_curlcurl(double x, double z, double h) {
  auto a = [](double px, double py, double pz, int comp) {
    const double r2 = px * px + py * py;
    const double g = vortex_gamma(std::sqrt(r2), pz);
    return comp == 0 ? -g * py / r2 : (comp == 1 ? g * px / r2 : 0.0);
  };
  auto curl = [&](double px, double py, double pz, int comp) {
    auto d = [&](int f, int axis) {
      double p[3] = {px, py, pz}, m[3] = {px, py, pz};
      p[axis] += h;
      m[axis] -= h;
      return (a(p[0], p[1], p[2], f) - a(m[0], m[1], m[2], f)) / (2.0 * h);
    };
    if (comp == 0) return d(2, 1) - d(1, 2);
    if (comp == 1) return d(0, 2) - d(2, 0);
    return d(1, 0) - d(0, 1);
  };
  // y component of curl(curl A) = d_z B_x - d_x B_z.
  const double dz_bx = (curl(x, 0, z + h, 0) - curl(x, 0, z - h, 0)) / (2.0 * h);
  const double dx_bz = (curl(x + h, 0, z, 2) - curl(x - h, 0, z, 2)) / (2.0 * h);
  return x * (dz_bx - dx_bz);
}

}  // namespace

TEST(AxiGrid, Geometry) {
  const AxiGrid g = AxiGrid::from_extent(16, 32, 8.0, 4.0);
  EXPECT_DOUBLE_EQ(g.dr(), 0.5);
  EXPECT_DOUBLE_EQ(g.dz(), 0.25);
  EXPECT_DOUBLE_EQ(g.r(0), 0.25);
  EXPECT_DOUBLE_EQ(g.z(0), -3.875);
  EXPECT_DOUBLE_EQ(g.z(31), 3.875);
  EXPECT_DOUBLE_EQ(g.r_face(-1), 0.0);
  EXPECT_EQ(g.index(3, 2), 2u * 16u + 3u);
  EXPECT_THROW(AxiGrid(4, 16, 0.1, 0.1), std::invalid_argument);
  EXPECT_THROW(AxiGrid(16, 16, 0.0, 0.1), std::invalid_argument);
}

TEST(AxiGrid, FieldValidation) {
  const AxiGrid g(8, 8, 0.1, 0.1);
  EXPECT_THROW(ScalarField(g, std::vector<double>(63, 0.0)), std::invalid_argument);
  std::vector<double> v(64, 0.0);
  v[5] = std::nan("");
  EXPECT_THROW(ScalarField(g, v), std::invalid_argument);
  const ScalarField a(g), b(AxiGrid(8, 8, 0.2, 0.1));
  EXPECT_THROW(inner_axi(a, b), std::invalid_argument);
}

TEST(AxiGrid, LaplacianExactOnQuadraticsInInterior) {
  const AxiGrid g(16, 20, 0.3, 0.2);
  const ScalarField f = ScalarField::sample(g, [](double r, double z) {
    return 1.5 + 2.0 * r * r - 0.7 * z + 0.3 * z * z + 0.5 * r * r * z;
  });
  const ScalarField lap = laplace_axi(f);
  for (int j = 1; j + 1 < g.nz(); ++j) {
    for (int i = 0; i + 1 < g.nr(); ++i) {
      const double expect = 8.0 + 0.6 + 2.0 * g.z(j);
      EXPECT_NEAR(lap(i, j), expect, 1e-11) << i << ' ' << j;
    }
  }
}

TEST(AxiGrid, LaplacianSecondOrderTruncation) {
  double prev = 0.0;
  for (int n : {32, 64, 128}) {
    const AxiGrid g = AxiGrid::from_extent(n, 2 * n, 6.0, 6.0);
    const ScalarField lap = laplace_axi(ScalarField::sample(g, gaussian));
    double err = 0.0;
    for (int j = 0; j < g.nz(); ++j) {
      for (int i = 0; i < g.nr(); ++i) {
        const double r = g.r(i), z = g.z(j);
        const double exact = (4.0 * (r * r + z * z) - 6.0) * gaussian(r, z);
        err = std::max(err, std::abs(lap(i, j) - exact));
      }
    }
    if (prev > 0.0) {
      EXPECT_NEAR(prev / err, 4.0, 0.4) << n;
    }
    prev = err;
  }
}

TEST(AxiGrid, OperatorsAreSymmetric) {
  const AxiGrid g(12, 14, 0.4, 0.3);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  auto random_field = [&] {
    ScalarField f(g);
    for (std::size_t k = 0; k < f.size(); ++k) f[k] = d(rng);
    return f;
  };
  const ScalarField a = random_field(), b = random_field();
  EXPECT_NEAR(inner_axi(a, laplace_axi(b)), inner_axi(laplace_axi(a), b), 1e-10);
  // curl-curl is symmetric in the 1/r^2-weighted product.
  auto weighted = [&](const ScalarField& x, const ScalarField& y) {
    double t = 0.0;
    for (int j = 0; j < g.nz(); ++j)
      for (int i = 0; i < g.nr(); ++i) t += x(i, j) * y(i, j) * g.weight(i) / (g.r(i) * g.r(i));
    return t;
  };
  EXPECT_NEAR(weighted(a, curlcurl_theta(b)), weighted(curlcurl_theta(a), b), 1e-9);
  EXPECT_GT(dirichlet_energy(a), 0.0);
  EXPECT_GT(curl_energy(a), 0.0);
}

TEST(AxiGrid, CurlCurlFormulaMatchesCartesianStencil) {
  for (double r : {0.3, 0.9, 1.7}) {
    for (double z : {-0.8, 0.0, 0.4}) {
      EXPECT_NEAR(cartesian_curlcurl(r, z, 1e-3), vortex_curlcurl(r, z), 1e-5) << r << ' ' << z;
    }
  }
}

TEST(AxiGrid, CurlCurlSecondOrderIncludingAxis) {
  double prev = 0.0;
  for (int n : {32, 64, 128}) {
    const AxiGrid g = AxiGrid::from_extent(n, 2 * n, 6.0, 6.0);
    const ScalarField cc = curlcurl_theta(ScalarField::sample(g, vortex_gamma));
    double err = 0.0;
    for (int j = 0; j < g.nz(); ++j)
      for (int i = 0; i < g.nr(); ++i) err = std::max(err, std::abs(cc(i, j) - vortex_curlcurl(g.r(i), g.z(j))));
    if (prev > 0.0) {
      EXPECT_GT(prev / err, 3.5) << n;
    }
    prev = err;
  }
}

TEST(AxiGrid, InhomogeneousBoundaryData) {
  // Linear data is reproduced exactly by the ghost rule.
  const AxiGrid g(10, 12, 0.3, 0.25);
  auto lin = [](double, double z) { return 2.0 + 0.5 * z; };
  const ScalarField lap = laplace_axi(ScalarField::sample(g, lin), BoundaryValues(lin));
  EXPECT_LT(lap.max_abs(), 1e-12);
  auto quad = [](double r, double) { return r * r; };
  const ScalarField cc = curlcurl_theta(ScalarField::sample(g, quad), BoundaryValues(quad));
  // -gamma_rr + gamma_r / r = -2 + 2 = 0 for gamma = r^2 away from the outer face.
  for (int j = 0; j < g.nz(); ++j)
    for (int i = 0; i + 1 < g.nr(); ++i) EXPECT_NEAR(cc(i, j), 0.0, 1e-11);
}

TEST(AxiGrid, QuadratureConverges) {
  double prev = 0.0;
  for (int n : {32, 64, 128}) {
    const AxiGrid g = AxiGrid::from_extent(n, 2 * n, 7.0, 7.0);
    const double err = std::abs(integrate_axi(ScalarField::sample(g, gaussian)) - std::pow(kPi, 1.5));
    if (prev > 0.0) {
      EXPECT_GT(prev / err, 3.5);
    }
    prev = err;
  }
  EXPECT_LT(prev, 2e-3);
}

TEST(AxiGrid, EnergiesApproachContinuumValues) {
  const AxiGrid g = AxiGrid::from_extent(128, 256, 7.0, 7.0);
  const double grad_exact = 6.0 * std::pow(kPi, 1.5) / std::pow(2.0, 2.5);
  EXPECT_NEAR(dirichlet_energy(ScalarField::sample(g, gaussian)), grad_exact, 2e-3 * grad_exact);
  // integral (gamma_r^2 + gamma_z^2) / r^2 dx for gamma = r^2 e^{-r^2-z^2},
  // by composite Simpson in r and z.
  auto integrand = [](double r, double z) {
    const double e = gaussian(r, z);
    const double gr = (2.0 * r - 2.0 * r * r * r) * e;
    const double gz = -2.0 * z * r * r * e;
    return (gr * gr + gz * gz) / (r * r) * 2.0 * kPi * r;
  };
  const int m = 2000;
  const double h = 7.0 / m;
  double exact = 0.0;
  for (int a = 0; a <= m; ++a) {
    for (int b = -m; b <= m; ++b) {
      const double wa = (a == 0 || a == m) ? 1.0 : (a % 2 ? 4.0 : 2.0);
      const int bb = b + m;
      const double wb = (bb == 0 || bb == 2 * m) ? 1.0 : (bb % 2 ? 4.0 : 2.0);
      const double r = a * h;
      if (r == 0.0) continue;
      exact += wa * wb * integrand(r, b * h);
    }
  }
  exact *= h * h / 9.0;
  EXPECT_NEAR(curl_energy(ScalarField::sample(g, vortex_gamma)), exact, 2e-3 * exact);
}

TEST(AxiGrid, WeightedNorm) {
  const AxiGrid g = AxiGrid::from_extent(32, 64, 6.0, 6.0);
  const ScalarField f = ScalarField::sample(g, gaussian);
  const double base = weighted_h1_norm_sq(f, 0);
  EXPECT_NEAR(base, dirichlet_energy(f) + inner_axi(f, f), 1e-12);
  EXPECT_GT(weighted_h1_norm_sq(f, 2), base);
}

TEST(AxiGrid, CsvRoundTripIsBitExact) {
  const AxiGrid g(9, 11, 0.37, 0.21);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> d;
  ScalarField f(g);
  for (std::size_t k = 0; k < f.size(); ++k) f[k] = d(rng) * std::pow(10.0, static_cast<int>(k % 7) - 3);
  std::stringstream ss;
  write_csv(ss, f);
  const ScalarField back = read_csv(ss, g);
  EXPECT_EQ(back.values(), f.values());
  std::stringstream bad("r,z,v\n");
  EXPECT_THROW(read_csv(bad, g), std::runtime_error);
}
