#pragma once

// Randomised consistency suites for the transport coefficient and the
// polar-form Lagrangian: finite differences of the matrix exponential, the
// truncated ad-series, conjugate momenta by finite differences, and the
// Legendre identity for the energy density.

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qvortex/functionals.hpp"
#include "qvortex/potential.hpp"
#include "qvortex/su2_algebra.hpp"

namespace qvortex {

struct SuiteResult {
  std::string name;
  int samples = 0;
  int failures = 0;
  double worst = 0.0;
  double tolerance = 0.0;
  std::string first_failure;

  bool passed() const { return failures == 0; }

  void record(double err, const std::string& what) {
    ++samples;
    worst = std::max(worst, err);
    if (!(err <= tolerance)) {
      if (failures == 0) first_failure = what;
      ++failures;
    }
  }
};

inline Su2Vector random_su2(std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  Su2Vector v;
  v.s1 = d(rng);
  v.s2 = d(rng);
  v.s3 = d(rng);
  return v;
}

/// Uniformly distributed direction scaled to the given norm.
inline Su2Vector random_su2_with_norm(std::mt19937_64& rng, double n) {
  std::normal_distribution<double> d(0.0, 1.0);
  Su2Vector v;
  do {
    v = Su2Vector{d(rng), d(rng), d(rng)};
  } while (norm(v) < 1e-8);
  return (n / norm(v)) * v;
}

/// (exp(S + eps dS) - exp(S)) / eps times exp(S)^{-1} = exp(S)^*, as a matrix.
inline Mat2c transport_finite_difference(const Su2Vector& s, const Su2Vector& ds, double eps = 1e-6) {
  const Mat2c e0 = exp_su2(s);
  Mat2c d = exp_su2(s + eps * ds) - e0;
  d *= 1.0 / eps;
  return d * e0.adjoint();
}

inline PolarSample random_polar_sample(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::uniform_real_distribution<double> pos(0.1, 2.0);
  std::uniform_real_distribution<double> coupling(0.0, 1.0);
  PolarSample p;
  p.q = coupling(rng);
  p.u = pos(rng);
  p.dt_u = d(rng);
  for (auto& x : p.grad_u) x = d(rng);
  p.s = random_su2(rng);
  p.dt_s = random_su2(rng);
  for (auto& x : p.d_s) x = random_su2(rng);
  for (auto& x : p.gamma) x = random_su2(rng);
  for (auto& x : p.dt_gamma) x = random_su2(rng);
  for (auto& row : p.d_gamma)
    for (auto& x : row) x = random_su2(rng);
  return p;
}

/// Central differences of L0 + L1 with respect to d_t u, d_t S_m and d_t gamma_{j,m}.
inline ConjugateMomenta momenta_finite_difference(const PolarSample& p, TransportVariant variant,
                                                  double h = 1e-5) {
  auto lag = [&](const PolarSample& x) { return lagrangian_l0(x, variant) + lagrangian_l1(x); };
  ConjugateMomenta out;
  {
    PolarSample a = p, b = p;
    a.dt_u += h;
    b.dt_u -= h;
    out.u = (lag(a) - lag(b)) / (2.0 * h);
  }
  for (std::size_t m = 0; m < 3; ++m) {
    PolarSample a = p, b = p;
    a.dt_s[m] += h;
    b.dt_s[m] -= h;
    out.s[m] = (lag(a) - lag(b)) / (2.0 * h);
  }
  for (std::size_t j = 1; j <= 3; ++j) {
    for (std::size_t m = 0; m < 3; ++m) {
      PolarSample a = p, b = p;
      a.dt_gamma[j][m] += h;
      b.dt_gamma[j][m] -= h;
      out.gamma[j - 1][m] = (lag(a) - lag(b)) / (2.0 * h);
    }
  }
  return out;
}

/// sum p * velocity - L, the Legendre transform evaluated from the momenta.
inline double legendre_energy(const PolarSample& p, const PotentialSpec& pot, TransportVariant variant) {
  const ConjugateMomenta mom = appendix_momenta(p, variant);
  double e = mom.u * p.dt_u + dot(mom.s, p.dt_s);
  for (std::size_t j = 1; j <= 3; ++j)
    for (std::size_t m = 0; m < 3; ++m) e += mom.gamma[j - 1][m] * p.dt_gamma[j][m];
  return e - lagrangian(p, pot, variant);
}

namespace detail {

inline std::string describe(const Su2Vector& s, const Su2Vector& ds) {
  std::ostringstream os;
  os.precision(17);
  os << "S=(" << s.s1 << "," << s.s2 << "," << s.s3 << ") dS=(" << ds.s1 << "," << ds.s2 << "," << ds.s3 << ")";
  return os.str();
}

inline double max_component_diff(const Su2Vector& a, const Su2Vector& b) {
  return std::max({std::abs(a.s1 - b.s1), std::abs(a.s2 - b.s2), std::abs(a.s3 - b.s3)});
}

}  // namespace detail

/// Finite differences of exp against transport_coefficient with |S| = s_norm.
inline SuiteResult suite_transport_fd(std::mt19937_64& rng, int n, TransportVariant variant, double s_norm,
                                      double tol = 1e-5) {
  SuiteResult r;
  r.name = variant == TransportVariant::PaperConstants ? "transport/fd/constants" : "transport/fd/general";
  r.tolerance = tol;
  for (int k = 0; k < n; ++k) {
    const Su2Vector s = random_su2_with_norm(rng, s_norm);
    const Su2Vector ds = random_su2(rng);
    const Mat2c fd = transport_finite_difference(s, ds);
    const double err = (fd - to_matrix(transport_coefficient(s, ds, variant))).max_abs();
    r.record(err, detail::describe(s, ds));
  }
  return r;
}

/// Same as suite_transport_fd with |S| uniform on (0, s_hi].
inline SuiteResult suite_transport_fd_range(std::mt19937_64& rng, int n, TransportVariant variant, double s_hi,
                                            double tol = 1e-5) {
  SuiteResult r;
  r.name = variant == TransportVariant::PaperConstants ? "transport/fd/constants" : "transport/fd/general";
  r.tolerance = tol;
  std::uniform_real_distribution<double> norm_dist(0.0, s_hi);
  for (int k = 0; k < n; ++k) {
    double sn = 0.0;
    while (sn == 0.0) sn = norm_dist(rng);
    const Su2Vector s = random_su2_with_norm(rng, sn);
    const Su2Vector ds = random_su2(rng);
    const double err =
        (transport_finite_difference(s, ds) - to_matrix(transport_coefficient(s, ds, variant))).max_abs();
    r.record(err, detail::describe(s, ds));
  }
  return r;
}

/// General coefficients against the partial ad-series with n_terms terms, |S| uniform on (0, s_hi].
inline SuiteResult suite_transport_series(std::mt19937_64& rng, int n, int n_terms, double s_hi,
                                          double tol = 1e-12) {
  SuiteResult r;
  r.name = "transport/series/" + std::to_string(n_terms);
  r.tolerance = tol;
  std::uniform_real_distribution<double> norm_dist(0.0, s_hi);
  for (int k = 0; k < n; ++k) {
    double sn = 0.0;
    while (sn == 0.0) sn = norm_dist(rng);
    const Su2Vector s = random_su2_with_norm(rng, sn);
    const Su2Vector ds = random_su2(rng);
    const double err = detail::max_component_diff(
        ad_series_dexp(s, ds, n_terms), transport_coefficient(s, ds, TransportVariant::GeneralCoefficients));
    r.record(err, detail::describe(s, ds));
  }
  return r;
}

/// dS parallel to S: both variants must return dS.
inline SuiteResult suite_single_generator(std::mt19937_64& rng, int n, double tol = 1e-15) {
  SuiteResult r;
  r.name = "transport/parallel";
  r.tolerance = tol;
  std::uniform_real_distribution<double> scale(-3.0, 3.0);
  for (int k = 0; k < n; ++k) {
    const Su2Vector s = random_su2(rng, -2.0, 2.0);
    const Su2Vector ds = scale(rng) * s;
    for (auto v : {TransportVariant::PaperConstants, TransportVariant::GeneralCoefficients}) {
      const Su2Vector c = transport_coefficient(s, ds, v);
      const double err = detail::max_component_diff(c, ds) / std::max(1.0, norm(ds));
      r.record(err, detail::describe(s, ds));
    }
  }
  return r;
}

/// Conjugate momenta against central differences, relative error |fd - p| / (1 + |p|).
inline SuiteResult suite_momenta(std::mt19937_64& rng, int n, TransportVariant variant, double tol = 1e-6) {
  SuiteResult r;
  r.name = variant == TransportVariant::PaperConstants ? "momenta/constants" : "momenta/general";
  r.tolerance = tol;
  for (int k = 0; k < n; ++k) {
    const PolarSample p = random_polar_sample(rng);
    const ConjugateMomenta an = appendix_momenta(p, variant);
    const ConjugateMomenta fd = momenta_finite_difference(p, variant);
    auto rel = [](double a, double b) { return std::abs(a - b) / (1.0 + std::abs(a)); };
    double err = rel(an.u, fd.u);
    for (std::size_t m = 0; m < 3; ++m) err = std::max(err, rel(an.s[m], fd.s[m]));
    for (std::size_t j = 0; j < 3; ++j)
      for (std::size_t m = 0; m < 3; ++m) err = std::max(err, rel(an.gamma[j][m], fd.gamma[j][m]));
    r.record(err, "sample " + std::to_string(k));
  }
  return r;
}

/// Energy density against the Legendre transform, relative error |E - H| / (1 + |H|).
inline SuiteResult suite_legendre(std::mt19937_64& rng, int n, TransportVariant variant, const PotentialSpec& pot,
                                  double tol = 1e-10) {
  SuiteResult r;
  r.name = variant == TransportVariant::PaperConstants ? "legendre/constants" : "legendre/general";
  r.tolerance = tol;
  for (int k = 0; k < n; ++k) {
    const PolarSample p = random_polar_sample(rng);
    const double e = noether_energy_density(p, pot, variant);
    const double h = legendre_energy(p, pot, variant);
    r.record(std::abs(e - h) / (1.0 + std::abs(h)), "sample " + std::to_string(k));
  }
  return r;
}

}  // namespace qvortex
