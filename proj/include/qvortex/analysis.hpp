#pragma once

// Correspondence between the SU(2) ansatz system and its Abelian reduction,
// and quantitative checks of the nonexistence argument for Higgs-type
// self-interactions.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "qvortex/axigrid.hpp"
#include "qvortex/functionals.hpp"
#include "qvortex/potential.hpp"
#include "qvortex/solver.hpp"

namespace qvortex {

/// An ansatz state together with its image v = u / sqrt 2 (all other fields,
/// omega, l and q unchanged).
struct ReductionPair {
  AnsatzState original;
  AnsatzState reduced;
};

inline ReductionPair make_reduction_pair(const AnsatzState& s) {
  AnsatzState red = s;
  red.u *= 1.0 / std::sqrt(2.0);
  return {s, std::move(red)};
}

/// Largest relative mismatch, over the matter, Gauss and curl equations, between
/// the residuals of the reduced system (potential reduce_potential(pot), unit
/// gauge coefficient) and the transported residuals of the original system
/// (matter / sqrt 2, Gauss / 2, curl / 2). Each mismatch is measured against the
/// L2 norm of the transported residual; a pair of vanishing residuals counts 0.
inline double reduction_residual_gap(const ReductionPair& pair, const PotentialSpec& pot) {
  require_same_grid(pair.original.u, pair.reduced.u);
  const AnsatzState& a = pair.original;
  const AnsatzState& b = pair.reduced;
  if (a.omega != b.omega || a.ell != b.ell || a.q != b.q)
    throw std::invalid_argument("reduction_residual_gap: parameters differ between the pair");
  const PotentialSpec red_pot = reduce_potential(pot);

  auto gap = [](ScalarField reduced, ScalarField transported) {
    const double scale = l2_norm(transported);
    reduced -= transported;
    const double diff = l2_norm(reduced);
    if (diff == 0.0) return 0.0;
    return scale > 0.0 ? diff / scale : std::numeric_limits<double>::infinity();
  };
  const double matter = gap(matter_residual(b, red_pot), (1.0 / std::sqrt(2.0)) * matter_residual(a, pot));
  const double gauss = gap(gauss_residual(b, 1.0), 0.5 * gauss_residual(a, 2.0));
  const double rotore = gap(rotore_residual(b, 1.0), 0.5 * rotore_residual(a, 2.0));
  return std::max({matter, gauss, rotore});
}

// ---------------------------------------------------------------------------

/// Lower-bound integrals I(Z) = integral_{R < r < R'} integral_{K < |z| < Z}
/// ((|l| / r - eps) / q)^6 r dr dz for a list of heights Z, with a
/// least-squares line I = slope Z + intercept.
struct DivergenceScan {
  int ell = 0;
  double q = 0.0;
  double eps = 0.0;
  double r_inner = 0.0;
  double r_outer = 0.0;
  double z_cut = 0.0;
  std::vector<double> z_values;
  std::vector<double> integrals;
  double slope = 0.0;
  double intercept = 0.0;
  /// ||I - fit|| / ||I||.
  double fit_residual = 0.0;
};

namespace detail {

// 8-point Gauss-Legendre nodes and weights on [-1, 1].
inline constexpr std::array<double, 8> kGaussNodes = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
    0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
inline constexpr std::array<double, 8> kGaussWeights = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
    0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

template <class F>
double gauss_legendre(F&& f, double a, double b, int panels) {
  const double h = (b - a) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    double acc = 0.0;
    for (std::size_t k = 0; k < kGaussNodes.size(); ++k) acc += kGaussWeights[k] * f(mid + 0.5 * h * kGaussNodes[k]);
    total += 0.5 * h * acc;
  }
  return total;
}

}  // namespace detail

inline DivergenceScan no_higgs_divergence_scan(int ell, double q, double eps, double r_inner, double r_outer,
                                               double z_cut, const std::vector<double>& z_values) {
  auto fail = [](const std::string& m) { throw std::invalid_argument("no_higgs_divergence_scan: " + m); };
  if (ell == 0) fail("ell must be nonzero");
  if (!(q > 0.0)) fail("q must be > 0");
  if (!(eps > 0.0)) fail("eps must be > 0");
  if (!(r_inner > 0.0) || !(r_outer > r_inner)) fail("need 0 < r_inner < r_outer");
  const double l = std::abs(static_cast<double>(ell));
  if (!(eps < l / r_outer)) fail("eps must be below |ell| / r_outer");
  if (!(z_cut >= 0.0)) fail("z_cut must be >= 0");
  if (z_values.empty()) fail("z_values is empty");
  for (std::size_t k = 0; k < z_values.size(); ++k) {
    if (!(z_values[k] >= z_cut)) fail("z_values must be >= z_cut");
    if (k > 0 && !(z_values[k] > z_values[k - 1])) fail("z_values must be ascending");
  }

  DivergenceScan scan;
  scan.ell = ell;
  scan.q = q;
  scan.eps = eps;
  scan.r_inner = r_inner;
  scan.r_outer = r_outer;
  scan.z_cut = z_cut;
  scan.z_values = z_values;

  auto radial = [&](double r) {
    const double a = (l / r - eps) / q;
    const double a2 = a * a;
    return a2 * a2 * a2 * r;
  };
  for (double z : z_values) {
    auto slab = [&](double) { return detail::gauss_legendre(radial, r_inner, r_outer, 64); };
    const double half = z > z_cut ? detail::gauss_legendre(slab, z_cut, z, 1) : 0.0;
    scan.integrals.push_back(2.0 * half);
  }

  const auto n = static_cast<double>(z_values.size());
  double sz = 0.0, si = 0.0, szz = 0.0, szi = 0.0;
  for (std::size_t k = 0; k < z_values.size(); ++k) {
    sz += z_values[k];
    si += scan.integrals[k];
    szz += z_values[k] * z_values[k];
    szi += z_values[k] * scan.integrals[k];
  }
  const double den = n * szz - sz * sz;
  if (den > 0.0) {
    scan.slope = (n * szi - sz * si) / den;
    scan.intercept = (si - scan.slope * sz) / n;
  }
  double res2 = 0.0, norm2 = 0.0;
  for (std::size_t k = 0; k < z_values.size(); ++k) {
    const double d = scan.integrals[k] - (scan.slope * z_values[k] + scan.intercept);
    res2 += d * d;
    norm2 += scan.integrals[k] * scan.integrals[k];
  }
  scan.fit_residual = norm2 > 0.0 ? std::sqrt(res2 / norm2) : 0.0;
  return scan;
}

// ---------------------------------------------------------------------------

/// Evidence that a finite potential energy pins the far-field amplitude near
/// the nonzero zero s_bar of a Higgs-type potential.
struct TailCertificate {
  double s_bar = 0.0;
  /// f''(s_bar); the quadratic lower bound f >= (curvature / 2)(s - s_bar)^2 near s_bar needs it > 0.
  double curvature = 0.0;
  /// Smallest sampled f on [0, s_max] outside the band |s - s_bar| < tol.
  double min_outside_band = 0.0;
  bool within_band = false;
  bool certificate = false;
  std::string diagnostic;
};

/// Throws std::invalid_argument if pot is not Higgs-type on [0, s_max].
inline TailCertificate higgs_tail_certificate(const PotentialSpec& pot, double u_far, double tol,
                                              double s_max = 4.0) {
  if (!(tol > 0.0)) throw std::invalid_argument("higgs_tail_certificate: tol must be > 0");
  const HiggsDetection det = is_higgs_type(pot, s_max);
  if (!det.is_higgs) throw std::invalid_argument("higgs_tail_certificate: potential is not Higgs-type");
  TailCertificate c;
  c.s_bar = *det.s_bar;
  c.curvature = evaluate(pot, c.s_bar, 2);
  const int n = 20000;
  c.min_outside_band = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= n; ++k) {
    const double s = s_max * k / n;
    if (std::abs(s - c.s_bar) >= tol) c.min_outside_band = std::min(c.min_outside_band, evaluate(pot, s, 0));
  }
  c.within_band = std::abs(u_far - c.s_bar) < tol;
  if (!(c.curvature > 0.0)) {
    c.diagnostic = "f''(s_bar) <= 0: quadratic lower bound unavailable";
  } else if (!(c.min_outside_band > 0.0)) {
    c.diagnostic = "f vanishes outside the tolerance band";
  } else if (!c.within_band) {
    c.diagnostic = "far-field amplitude lies outside the tolerance band";
  } else {
    c.certificate = true;
    c.diagnostic = "ok";
  }
  return c;
}

}  // namespace qvortex
