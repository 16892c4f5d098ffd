#pragma once

// Field equations of the axisymmetric ansatz, the linear gauge solves, a
// radial shooting oracle for the decoupled problem, and the coupled solver.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qvortex/axigrid.hpp"
#include "qvortex/functionals.hpp"
#include "qvortex/krylov.hpp"
#include "qvortex/potential.hpp"

namespace qvortex {

// ---------------------------------------------------------------------------
// Residuals

/// -laplace u + [ (l + q gamma)^2 / r^2 - (omega + q gamma0)^2 ] u + f'(u).
inline ScalarField matter_residual(const AnsatzState& s, const PotentialSpec& pot) {
  const AxiGrid& g = s.grid();
  ScalarField out = laplace_axi(s.u);
  out *= -1.0;
  for (int j = 0; j < g.nz(); ++j) {
    for (int i = 0; i < g.nr(); ++i) {
      const double r = g.r(i);
      const double a = s.ell + s.q * s.gamma(i, j);
      const double b = s.omega + s.q * s.gamma0(i, j);
      const double u = s.u(i, j);
      out(i, j) += (a * a / (r * r) - b * b) * u + signed_derivative(pot, u);
    }
  }
  return out;
}

/// -k laplace gamma0 + q (omega + q gamma0) u^2, with k = 2 in the SU(2)
/// system and k = 1 in its Abelian reduction.
inline ScalarField gauss_residual(const AnsatzState& s, double gauge_coefficient = 2.0) {
  ScalarField out = laplace_axi(s.gamma0);
  out *= -gauge_coefficient;
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] += s.q * (s.omega + s.q * s.gamma0[k]) * s.u[k] * s.u[k];
  }
  return out;
}

/// Coefficient of grad(theta) in k curl curl(gamma grad theta) + q (l + q gamma) u^2 grad(theta).
inline ScalarField rotore_residual(const AnsatzState& s, double gauge_coefficient = 2.0) {
  ScalarField out = curlcurl_theta(s.gamma);
  out *= gauge_coefficient;
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] += s.q * (s.ell + s.q * s.gamma[k]) * s.u[k] * s.u[k];
  }
  return out;
}

/// L2 norms of the three residuals, absolute and relative to the sum of the
/// L2 norms of the individual terms of each equation (0 when all terms vanish).
struct ResidualNorms {
  double matter = 0.0;
  double gauss = 0.0;
  double rotore = 0.0;
  double matter_rel = 0.0;
  double gauss_rel = 0.0;
  double rotore_rel = 0.0;
};

inline ResidualNorms residual_norms(const AnsatzState& s, const PotentialSpec& pot,
                                    double gauge_coefficient = 2.0) {
  const AxiGrid& g = s.grid();
  ResidualNorms out;
  out.matter = l2_norm(matter_residual(s, pot));
  out.gauss = l2_norm(gauss_residual(s, gauge_coefficient));
  out.rotore = l2_norm(rotore_residual(s, gauge_coefficient));

  ScalarField vortex(g), electric(g), force(g), gauss_src(g), rot_src(g);
  for (int j = 0; j < g.nz(); ++j) {
    for (int i = 0; i < g.nr(); ++i) {
      const double r = g.r(i);
      const double u = s.u(i, j);
      const double a = s.ell + s.q * s.gamma(i, j);
      const double b = s.omega + s.q * s.gamma0(i, j);
      vortex(i, j) = a * a / (r * r) * u;
      electric(i, j) = b * b * u;
      force(i, j) = signed_derivative(pot, u);
      gauss_src(i, j) = s.q * b * u * u;
      rot_src(i, j) = s.q * a * u * u;
    }
  }
  const double matter_scale =
      l2_norm(laplace_axi(s.u)) + l2_norm(vortex) + l2_norm(electric) + l2_norm(force);
  const double gauss_scale = gauge_coefficient * l2_norm(laplace_axi(s.gamma0)) + l2_norm(gauss_src);
  const double rotore_scale = gauge_coefficient * l2_norm(curlcurl_theta(s.gamma)) + l2_norm(rot_src);
  out.matter_rel = matter_scale > 0.0 ? out.matter / matter_scale : 0.0;
  out.gauss_rel = gauss_scale > 0.0 ? out.gauss / gauss_scale : 0.0;
  out.rotore_rel = rotore_scale > 0.0 ? out.rotore / rotore_scale : 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// Linear gauge solves

struct LinearSolveResult {
  ScalarField field;
  KrylovResult stats;
};

namespace detail {

// Diagonal of the homogeneous-Dirichlet -laplace_axi stencil.
inline Vec neg_laplace_diagonal(const AxiGrid& g) {
  Vec d(g.size());
  const double dr2 = g.dr() * g.dr();
  const double dz2 = g.dz() * g.dz();
  for (int j = 0; j < g.nz(); ++j) {
    const double axial = (2.0 + (j == 0 ? 1.0 : 0.0) + (j == g.nz() - 1 ? 1.0 : 0.0)) / dz2;
    for (int i = 0; i < g.nr(); ++i) {
      const double outer = g.r_face(i) * (i + 1 < g.nr() ? 1.0 : 2.0);
      const double inner = i > 0 ? g.r_face(i - 1) : 0.0;
      d[g.index(i, j)] = (outer + inner) / (g.r(i) * dr2) + axial;
    }
  }
  return d;
}

// Diagonal of the homogeneous curlcurl_theta stencil.
inline Vec curlcurl_diagonal(const AxiGrid& g) {
  Vec d(g.size());
  const double dr = g.dr();
  const double dz2 = g.dz() * g.dz();
  for (int j = 0; j < g.nz(); ++j) {
    const double axial = (2.0 + (j == 0 ? 1.0 : 0.0) + (j == g.nz() - 1 ? 1.0 : 0.0)) / dz2;
    for (int i = 0; i < g.nr(); ++i) {
      const double outer = (i + 1 < g.nr() ? 1.0 : 2.0) / (g.r_face(i) * dr);
      const double inner = i > 0 ? 1.0 / (g.r_face(i - 1) * dr) : 8.0 / (dr * dr);
      d[g.index(i, j)] = g.r(i) * (outer + inner) / dr + axial;
    }
  }
  return d;
}

// Node weights that make the radial stencils symmetric: 2 pi r dr dz for the
// Laplacian, 2 pi dr dz / r for the curl-curl operator.
inline Vec row_weights(const AxiGrid& g, bool curl) {
  Vec w(g.size());
  for (int j = 0; j < g.nz(); ++j)
    for (int i = 0; i < g.nr(); ++i) {
      const double wi = g.weight(i);
      w[g.index(i, j)] = curl ? wi / (g.r(i) * g.r(i)) : wi;
    }
  return w;
}

// Solves (k L + c) x = rhs, L = -laplace_axi or curlcurl_theta, by Jacobi CG
// on the row-weighted symmetric form.
inline LinearSolveResult solve_shifted(const AxiGrid& g, bool curl, double k, const Vec& c, const Vec& rhs,
                                       const ScalarField* initial, double tol, int max_iter) {
  const Vec w = row_weights(g, curl);
  const Vec base = curl ? curlcurl_diagonal(g) : neg_laplace_diagonal(g);
  const std::size_t n = g.size();
  Vec diag(n), b(n);
  for (std::size_t m = 0; m < n; ++m) {
    diag[m] = w[m] * (k * base[m] + c[m]);
    b[m] = w[m] * rhs[m];
  }
  auto apply_a = [&](const Vec& x, Vec& y) {
    ScalarField xf(g, x);
    ScalarField lx = curl ? curlcurl_theta(xf) : laplace_axi(xf);
    const double sign = curl ? 1.0 : -1.0;
    for (std::size_t m = 0; m < n; ++m) y[m] = w[m] * (sign * k * lx[m] + c[m] * x[m]);
  };
  auto apply_m = [&](const Vec& r, Vec& z) {
    for (std::size_t m = 0; m < n; ++m) z[m] = r[m] / diag[m];
  };
  Vec x = initial ? initial->values() : Vec(n, 0.0);
  KrylovResult stats = conjugate_gradient(apply_a, apply_m, b, x, tol, max_iter);
  return {ScalarField(g, std::move(x)), stats};
}

inline void require_coupling(double q) {
  if (!(q >= 0.0) || !std::isfinite(q)) throw std::invalid_argument("coupling q must be finite and >= 0");
}

}  // namespace detail

/// Solves -2 laplace gamma0 + q (omega + q gamma0) u^2 = forcing, i.e. the SPD
/// system (-2 laplace + q^2 u^2) gamma0 = forcing - q omega u^2, homogeneous
/// Dirichlet on the outer faces. tol is relative to the right-hand side.
inline LinearSolveResult solve_gamma0(const ScalarField& u, double omega, double q, const ScalarField& forcing,
                                      double tol, int max_iter = 20000, const ScalarField* initial = nullptr) {
  detail::require_coupling(q);
  require_same_grid(u, forcing);
  const std::size_t n = u.size();
  Vec c(n), rhs(n);
  for (std::size_t m = 0; m < n; ++m) {
    const double u2 = u[m] * u[m];
    c[m] = q * q * u2;
    rhs[m] = forcing[m] - q * omega * u2;
  }
  return detail::solve_shifted(u.grid(), false, 2.0, c, rhs, initial, tol, max_iter);
}

inline LinearSolveResult solve_gamma0(const ScalarField& u, double omega, double q, double tol,
                                      int max_iter = 20000, const ScalarField* initial = nullptr) {
  return solve_gamma0(u, omega, q, ScalarField(u.grid()), tol, max_iter, initial);
}

/// Solves 2 curlcurl_theta(gamma) + q (l + q gamma) u^2 = forcing, i.e.
/// (2 curlcurl + q^2 u^2) gamma = forcing - q l u^2, with the r^2 axis closure
/// and homogeneous Dirichlet on the outer faces.
inline LinearSolveResult solve_gamma(const ScalarField& u, int ell, double q, const ScalarField& forcing,
                                     double tol, int max_iter = 20000, const ScalarField* initial = nullptr) {
  detail::require_coupling(q);
  require_same_grid(u, forcing);
  const std::size_t n = u.size();
  Vec c(n), rhs(n);
  for (std::size_t m = 0; m < n; ++m) {
    const double u2 = u[m] * u[m];
    c[m] = q * q * u2;
    rhs[m] = forcing[m] - q * ell * u2;
  }
  return detail::solve_shifted(u.grid(), true, 2.0, c, rhs, initial, tol, max_iter);
}

inline LinearSolveResult solve_gamma(const ScalarField& u, int ell, double q, double tol, int max_iter = 20000,
                                     const ScalarField* initial = nullptr) {
  return solve_gamma(u, ell, q, ScalarField(u.grid()), tol, max_iter, initial);
}

// ---------------------------------------------------------------------------
// Continuity of the matter current

/// Discrete L2 norm of div J for J = (l + q gamma) u^2 grad(theta), evaluated
/// by Cartesian central differences (step dr) at azimuth theta0, with the
/// profile interpolated by 4-point cubics in r. Nodes within three cells of
/// the axis or the outer radius are skipped.
inline double continuity_residual(const AnsatzState& s, double theta0 = std::numbers::pi / 8.0) {
  const AxiGrid& g = s.grid();
  const int nr = g.nr();
  const double dr = g.dr();
  const double h = dr;
  ScalarField a(g);
  for (std::size_t k = 0; k < a.size(); ++k) a[k] = (s.ell + s.q * s.gamma[k]) * s.u[k] * s.u[k];

  auto interp = [&](double r, int j) {
    const double t = r / dr - 0.5;
    int i0 = static_cast<int>(std::floor(t)) - 1;
    i0 = std::clamp(i0, 0, nr - 4);
    double acc = 0.0;
    for (int p = 0; p < 4; ++p) {
      double lp = 1.0;
      for (int m = 0; m < 4; ++m)
        if (m != p) lp *= (t - (i0 + m)) / static_cast<double>(p - m);
      acc += lp * a(i0 + p, j);
    }
    return acc;
  };
  // J(x, y) at height z_j: a(rho) / rho * (-sin phi, cos phi).
  auto current = [&](double x, double y, int j, int comp) {
    const double rho = std::hypot(x, y);
    const double val = interp(rho, j) / (rho * rho);
    return comp == 0 ? -val * y : val * x;
  };

  double total = 0.0;
  for (int j = 0; j < g.nz(); ++j) {
    for (int i = 3; i < nr - 3; ++i) {
      const double x = g.r(i) * std::cos(theta0);
      const double y = g.r(i) * std::sin(theta0);
      const double div = (current(x + h, y, j, 0) - current(x - h, y, j, 0)) / (2.0 * h) +
                         (current(x, y + h, j, 1) - current(x, y - h, j, 1)) / (2.0 * h);
      total += div * div * g.weight(i);
    }
  }
  return std::sqrt(total);
}

// ---------------------------------------------------------------------------
// Radial shooting oracle for -u'' - (2/rho) u' - omega^2 u + f'(u) = 0

/// Ground-state radial profile on [0, rho_match] at spacing step, extended
/// beyond rho_match by the linear tail u(rho_m) (rho_m / rho) exp(-kappa (rho - rho_m)).
struct RadialProfile {
  double omega = 0.0;
  double u0 = 0.0;
  double step = 0.0;
  double rho_match = 0.0;
  double kappa = 0.0;
  std::vector<double> u;
  std::vector<double> du;

  double operator()(double rho) const {
    if (rho >= rho_match) {
      const double um = u.back();
      return um * (rho_match / rho) * std::exp(-kappa * (rho - rho_match));
    }
    const double t = rho / step;
    const auto k = std::min(static_cast<std::size_t>(t), u.size() - 2);
    const double s = t - static_cast<double>(k);
    // cubic Hermite on [k, k+1]
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
    const double h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s);
    const double h11 = s * s * (s - 1);
    return h00 * u[k] + h10 * step * du[k] + h01 * u[k + 1] + h11 * step * du[k + 1];
  }
};

namespace detail {

enum class ShotOutcome { Undershoot, Overshoot };

struct Trajectory {
  std::vector<double> u;
  std::vector<double> du;
};

inline ShotOutcome shoot_once(const PotentialSpec& pot, double omega, double u0, double h, double rho_max,
                              Trajectory* record) {
  const double w2 = omega * omega;
  auto accel = [&](double rho, double u, double v) { return signed_derivative(pot, u) - w2 * u - 2.0 * v / rho; };
  const double g0 = signed_derivative(pot, u0) - w2 * u0;
  if (record) {
    record->u.assign(1, u0);
    record->du.assign(1, 0.0);
  }
  double rho = h;
  double u = u0 + g0 * h * h / 6.0;
  double v = g0 * h / 3.0;
  const int n_steps = static_cast<int>(rho_max / h);
  for (int k = 1; k < n_steps; ++k) {
    if (record) {
      record->u.push_back(u);
      record->du.push_back(v);
    }
    if (u < 0.0) return ShotOutcome::Overshoot;
    if (v > 0.0) return ShotOutcome::Undershoot;
    const double k1u = v, k1v = accel(rho, u, v);
    const double k2u = v + 0.5 * h * k1v, k2v = accel(rho + 0.5 * h, u + 0.5 * h * k1u, v + 0.5 * h * k1v);
    const double k3u = v + 0.5 * h * k2v, k3v = accel(rho + 0.5 * h, u + 0.5 * h * k2u, v + 0.5 * h * k2v);
    const double k4u = v + h * k3v, k4v = accel(rho + h, u + h * k3u, v + h * k3v);
    u += h * (k1u + 2 * k2u + 2 * k3u + k4u) / 6.0;
    v += h * (k1v + 2 * k2v + 2 * k3v + k4v) / 6.0;
    rho += h;
  }
  return ShotOutcome::Undershoot;
}

}  // namespace detail

/// Nodeless decaying solution by bisection on u(0) between undershooting
/// (u' turns positive) and overshooting (u crosses zero) shots. Returns
/// nullopt when omega^2 >= m^2 or no undershoot/overshoot transition exists
/// for u(0) in (0, u0_max].
inline std::optional<RadialProfile> shoot_qball_1d(const PotentialSpec& pot, double omega, double u0_max = 4.0,
                                                   double step = 1e-3) {
  const double m2 = mass_squared(pot);
  if (!(m2 > 0.0) || !(omega * omega < m2)) return std::nullopt;
  const double rho_max = 80.0;
  using detail::ShotOutcome;
  const int n_scan = 400;
  double lo = -1.0, hi = -1.0;
  ShotOutcome prev = detail::shoot_once(pot, omega, u0_max / n_scan, step, rho_max, nullptr);
  for (int k = 2; k <= n_scan; ++k) {
    const double u0 = u0_max * k / n_scan;
    const ShotOutcome cur = detail::shoot_once(pot, omega, u0, step, rho_max, nullptr);
    if (prev == ShotOutcome::Undershoot && cur == ShotOutcome::Overshoot) {
      lo = u0_max * (k - 1) / n_scan;
      hi = u0;
      break;
    }
    prev = cur;
  }
  if (lo < 0.0) return std::nullopt;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (detail::shoot_once(pot, omega, mid, step, rho_max, nullptr) == ShotOutcome::Undershoot)
      lo = mid;
    else
      hi = mid;
  }
  detail::Trajectory under, over;
  detail::shoot_once(pot, omega, lo, step, rho_max, &under);
  detail::shoot_once(pot, omega, hi, step, rho_max, &over);
  const std::size_t n = std::min(under.u.size(), over.u.size());
  std::size_t cut = 1;
  for (std::size_t k = 1; k < n; ++k) {
    const double uk = under.u[k];
    if (std::abs(uk - over.u[k]) > 1e-10 * lo || uk < 1e-8 * lo || under.du[k] >= 0.0) break;
    cut = k;
  }
  RadialProfile p;
  p.omega = omega;
  p.u0 = lo;
  p.step = step;
  p.kappa = std::sqrt(m2 - omega * omega);
  p.u.assign(under.u.begin(), under.u.begin() + static_cast<std::ptrdiff_t>(cut + 1));
  p.du.assign(under.du.begin(), under.du.begin() + static_cast<std::ptrdiff_t>(cut + 1));
  p.rho_match = static_cast<double>(cut) * step;
  return p;
}

/// u(r, z) = profile(sqrt(r^2 + z^2)).
inline ScalarField sample_radial_profile(const AxiGrid& g, const RadialProfile& p) {
  return ScalarField::sample(g, [&](double r, double z) { return p(std::hypot(r, z)); });
}

// ---------------------------------------------------------------------------
// Scaling identity

/// Relative defect |G - P| / G of the scaling identity
///   G = integral |grad u|^2,  P = 3 integral (omega^2 u^2 - 2 f(u)),
/// satisfied by decoupled (q = 0, l = 0) solutions. nullopt when G = 0.
inline std::optional<double> pohozaev_check(const AnsatzState& s, const PotentialSpec& pot) {
  if (s.q != 0.0 || s.ell != 0) throw std::invalid_argument("pohozaev_check: requires q = 0 and ell = 0");
  const AxiGrid& g = s.grid();
  const double grad = dirichlet_energy(s.u);
  double rhs = 0.0;
  for (int i = 0; i < g.nr(); ++i) {
    double column = 0.0;
    for (int j = 0; j < g.nz(); ++j) {
      const double u = s.u(i, j);
      column += s.omega * s.omega * u * u - 2.0 * evaluate(pot, std::abs(u), 0);
    }
    rhs += column * g.weight(i);
  }
  rhs *= 3.0;
  if (!(grad > 0.0)) return std::nullopt;
  return std::abs(grad - rhs) / grad;
}

// ---------------------------------------------------------------------------
// Coupled solver

enum class SolveMode { FixedOmega, FixedCharge };

struct SeedProfile {
  double amplitude = 1.0;
  double width = 3.0;
};

struct SolverConfig {
  int nr = 64;
  int nz = 128;
  double r_max = 12.0;
  double z_half = 12.0;
  PotentialSpec potential = default_potential();
  int ell = 0;
  int m_gen = 3;
  SolveMode mode = SolveMode::FixedOmega;
  double omega = 0.8;
  double charge_target = 0.0;
  std::vector<double> q_path{0.0};
  double tol_gauge = 1e-10;
  double tol_flow = 1e-8;
  int max_outer = 3000;
  /// Largest step of the preconditioned flow line search.
  double step_size = 1.0;
  SeedProfile seed;
  /// Relative matter residual below which the flow hands over to Newton.
  double newton_switch = 1e-3;
  int max_krylov = 20000;
  double min_q_step = 1e-4;
  /// Seed l = 0 fixed-frequency runs from the radial shooting profile.
  bool shooting_seed = true;

  AxiGrid grid() const { return AxiGrid::from_extent(nr, nz, r_max, z_half); }

  void validate() const {
    auto fail = [](const std::string& m) { throw std::invalid_argument("SolverConfig: " + m); };
    if (nr < 8 || nz < 8) fail("nr and nz must be >= 8");
    if (!(r_max > 0.0) || !(z_half > 0.0)) fail("r_max and z_half must be > 0");
    if (m_gen < 1 || m_gen > 3) fail("m_gen must be 1, 2 or 3");
    if (!std::isfinite(omega)) fail("omega must be finite");
    if (mode == SolveMode::FixedCharge && !(charge_target > 0.0)) fail("charge_target must be > 0");
    if (q_path.empty() || q_path.front() != 0.0) fail("q_path must start at 0");
    for (std::size_t k = 1; k < q_path.size(); ++k)
      if (!(q_path[k] > q_path[k - 1]) || !std::isfinite(q_path[k])) fail("q_path must be strictly ascending");
    if (!(tol_gauge > 0.0) || !(tol_flow > 0.0)) fail("tolerances must be > 0");
    if (max_outer < 1 || max_krylov < 1) fail("iteration caps must be >= 1");
    if (!(step_size > 0.0)) fail("step_size must be > 0");
    if (!(seed.amplitude > 0.0) || !(seed.width > 0.0)) fail("seed amplitude and width must be > 0");
    if (!(newton_switch > 0.0)) fail("newton_switch must be > 0");
    if (!(min_q_step > 0.0)) fail("min_q_step must be > 0");
  }
};

struct SolveReport {
  double residual_matter = 0.0;
  double residual_gauss = 0.0;
  double residual_rotore = 0.0;
  double relative_matter = 0.0;
  double relative_gauss = 0.0;
  double relative_rotore = 0.0;
  int iterations = 0;
  EnergyBreakdown energy;
  double charge = 0.0;
  double angular_momentum = 0.0;
  double omega_final = 0.0;
  double q_final = 0.0;
  bool converged = false;
  std::optional<double> pohozaev_defect;
  std::string message;
};

struct SolveOutcome {
  AnsatzState state;
  SolveReport report;
};

/// a0 exp(-(r^2 + z^2) / sigma^2) (r / (r + dr))^|l|.
inline ScalarField gaussian_seed(const AxiGrid& g, const SeedProfile& seed, int ell) {
  const int p = std::abs(ell);
  return ScalarField::sample(g, [&](double r, double z) {
    return seed.amplitude * std::exp(-(r * r + z * z) / (seed.width * seed.width)) *
           std::pow(r / (r + g.dr()), p);
  });
}

namespace detail {

class CoupledSolver {
 public:
  CoupledSolver(const SolverConfig& cfg, AnsatzState state)
      : cfg_(cfg),
        g_(state.grid()),
        s_(std::move(state)),
        h_(g_),
        diag_lap_(neg_laplace_diagonal(g_)),
        w_(row_weights(g_, false)) {}

  AnsatzState& state() { return s_; }
  const ResidualNorms& last() const { return last_; }
  int iterations() const { return iterations_; }
  bool cap_reached() const { return iterations_ >= cfg_.max_outer; }
  const std::string& message() const { return message_; }
  void set_charge_target(double q_t) { charge_target_ = q_t; }

  /// Re-solves the gauge fields for the current u. In charge mode omega is
  /// set jointly with gamma0 = omega h so that the charge equals the target.
  void refresh_gauge(SolveMode mode) {
    const double q = s_.q;
    if (q == 0.0) {
      s_.gamma0 = ScalarField(g_);
      s_.gamma = ScalarField(g_);
      if (mode == SolveMode::FixedCharge) s_.omega = charge_target_ / inner_axi(s_.u, s_.u);
      return;
    }
    s_.gamma = solve_gamma(s_.u, s_.ell, q, cfg_.tol_gauge, cfg_.max_krylov, &s_.gamma).field;
    if (mode == SolveMode::FixedCharge) {
      h_ = solve_gamma0(s_.u, 1.0, q, cfg_.tol_gauge, cfg_.max_krylov, &h_).field;
      double denom = 0.0;
      for (int i = 0; i < g_.nr(); ++i) {
        double column = 0.0;
        for (int j = 0; j < g_.nz(); ++j) column += (1.0 + q * h_(i, j)) * s_.u(i, j) * s_.u(i, j);
        denom += column * g_.weight(i);
      }
      s_.omega = charge_target_ / denom;
      s_.gamma0 = s_.omega * h_;
    } else {
      s_.gamma0 = solve_gamma0(s_.u, s_.omega, q, cfg_.tol_gauge, cfg_.max_krylov, &s_.gamma0).field;
    }
  }

  bool converged(const ResidualNorms& r) const {
    const double t = cfg_.tol_flow;
    return r.matter <= t * (1.0 + l2_norm(s_.u)) && r.gauss <= t * (1.0 + l2_norm(s_.gamma0)) &&
           r.rotore <= t * (1.0 + l2_norm(s_.gamma));
  }

  /// Alternates gauge solves and matter steps at fixed q until the residual
  /// test passes; false on stagnation, Newton failure or the iteration cap.
  bool relax(SolveMode mode, bool flow_first) {
    bool flow = flow_first && mode == SolveMode::FixedCharge;
    double switch_tol = cfg_.newton_switch;
    int fallbacks = 0;
    double best = std::numeric_limits<double>::infinity();
    int since_best = 0;
    while (true) {
      refresh_gauge(mode);
      last_ = residual_norms(s_, cfg_.potential);
      if (converged(last_)) return true;
      if (cap_reached()) {
        message_ = "iteration cap reached";
        return false;
      }
      ++iterations_;
      if (flow) {
        flow_step();
        if (last_.matter_rel < switch_tol) flow = false;
        continue;
      }
      if (last_.matter < 0.5 * best) {
        best = last_.matter;
        since_best = 0;
      } else if (++since_best > 25) {
        message_ = "Newton iteration stagnated";
        return false;
      }
      if (!newton_step(mode)) {
        if (mode == SolveMode::FixedCharge && fallbacks < 5) {
          ++fallbacks;
          flow = true;
          switch_tol *= 0.1;
          best = std::numeric_limits<double>::infinity();
          since_best = 0;
          continue;
        }
        message_ = "Newton line search failed";
        return false;
      }
    }
  }

 private:
  // Flow objective with gauge fields frozen and omega eliminated by the charge
  // constraint; its gradient is the matter residual at the projected omega.
  double flow_objective(const ScalarField& u, double* omega_out) const {
    const double q = s_.q;
    double rest = 0.0, nn = 0.0, pp = 0.0;
    for (int i = 0; i < g_.nr(); ++i) {
      const double r2 = g_.r(i) * g_.r(i);
      double c_rest = 0.0, c_n = 0.0, c_p = 0.0;
      for (int j = 0; j < g_.nz(); ++j) {
        const double v = u(i, j);
        const double v2 = v * v;
        const double a = s_.ell + q * s_.gamma(i, j);
        const double g0 = s_.gamma0(i, j);
        c_rest += 0.5 * a * a * v2 / r2 + evaluate(cfg_.potential, std::abs(v), 0) - 0.5 * q * q * g0 * g0 * v2;
        c_n += v2;
        c_p += g0 * v2;
      }
      const double w = g_.weight(i);
      rest += c_rest * w;
      nn += c_n * w;
      pp += c_p * w;
    }
    const double num = charge_target_ - q * pp;
    if (omega_out) *omega_out = num / nn;
    return 0.5 * dirichlet_energy(u) + rest + 0.5 * num * num / nn;
  }

  void flow_step() {
    double omega = 0.0;
    const double f0 = flow_objective(s_.u, &omega);
    s_.omega = omega;
    const ScalarField res = matter_residual(s_, cfg_.potential);
    const std::size_t n = g_.size();
    // Sobolev preconditioner -laplace + l^2 / r^2 + m^2.
    const double m2 = std::max(mass_squared(cfg_.potential), 1e-2);
    Vec c(n), rhs(n);
    for (int j = 0; j < g_.nz(); ++j)
      for (int i = 0; i < g_.nr(); ++i) {
        const std::size_t k = g_.index(i, j);
        c[k] = m2 + static_cast<double>(s_.ell * s_.ell) / (g_.r(i) * g_.r(i));
        rhs[k] = -res[k];
      }
    ScalarField dir = solve_shifted(g_, false, 1.0, c, rhs, nullptr, 1e-8, cfg_.max_krylov).field;
    double slope = inner_axi(res, dir);
    if (!(slope < 0.0)) {
      dir = -1.0 * res;
      slope = -inner_axi(res, res);
    }
    double t = std::min(cfg_.step_size, 2.0 * flow_t_);
    for (int k = 0; k < 40; ++k) {
      ScalarField trial = s_.u;
      for (std::size_t m = 0; m < n; ++m) trial[m] += t * dir[m];
      if (flow_objective(trial, nullptr) <= f0 + 1e-4 * t * slope) {
        s_.u = std::move(trial);
        flow_t_ = t;
        flow_objective(s_.u, &s_.omega);
        return;
      }
      t *= 0.5;
    }
    flow_t_ = t;
  }

  double merit(const AnsatzState& st, SolveMode mode) const {
    const double r = l2_norm(matter_residual(st, cfg_.potential));
    double m = r * r;
    if (mode == SolveMode::FixedCharge) {
      const double d = charge_target_ - charge(st);
      m += d * d;
    }
    return m;
  }

  // Damped Newton step on the matter equation with frozen gauge fields,
  // bordered by the charge constraint in charge mode. Solved by MINRES.
  bool newton_step(SolveMode mode) {
    const bool bordered = mode == SolveMode::FixedCharge;
    const std::size_t n = g_.size();
    const std::size_t dim = n + (bordered ? 1 : 0);
    const ScalarField res = matter_residual(s_, cfg_.potential);
    Vec pot(n), b(n, 0.0), diag(dim);
    double nn = 0.0;
    for (int j = 0; j < g_.nz(); ++j) {
      for (int i = 0; i < g_.nr(); ++i) {
        const std::size_t k = g_.index(i, j);
        const double r = g_.r(i);
        const double u = s_.u[k];
        const double a = s_.ell + s_.q * s_.gamma[k];
        const double bb = s_.omega + s_.q * s_.gamma0[k];
        pot[k] = a * a / (r * r) - bb * bb + evaluate(cfg_.potential, std::abs(u), 2);
        b[k] = 2.0 * w_[k] * bb * u;
        nn += w_[k] * u * u;
        diag[k] = w_[k] * (diag_lap_[k] + std::abs(pot[k]));
      }
    }
    if (bordered) diag[n] = nn;
    auto apply_a = [&](const Vec& x, Vec& y) {
      ScalarField xf(g_, Vec(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n)));
      const ScalarField lx = laplace_axi(xf);
      for (std::size_t k = 0; k < n; ++k) y[k] = w_[k] * (-lx[k] + pot[k] * x[k]);
      if (bordered) {
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          y[k] -= b[k] * x[n];
          acc += b[k] * x[k];
        }
        y[n] = -acc - nn * x[n];
      }
    };
    auto apply_m = [&](const Vec& r, Vec& z) {
      for (std::size_t k = 0; k < dim; ++k) z[k] = r[k] / diag[k];
    };
    Vec rhs(dim);
    for (std::size_t k = 0; k < n; ++k) rhs[k] = -w_[k] * res[k];
    if (bordered) rhs[n] = -(charge_target_ - charge(s_));
    Vec dx;
    const double eta = std::clamp(0.1 * last_.matter_rel, 1e-11, 1e-4);
    minres(apply_a, apply_m, rhs, dx, eta, cfg_.max_krylov);

    const double m0 = merit(s_, mode);
    double t = 1.0;
    for (int k = 0; k < 12; ++k) {
      AnsatzState trial = s_;
      for (std::size_t m = 0; m < n; ++m) trial.u[m] += t * dx[m];
      if (bordered) trial.omega += t * dx[n];
      if (merit(trial, mode) < m0) {
        s_ = std::move(trial);
        return true;
      }
      t *= 0.5;
    }
    return false;
  }

  const SolverConfig& cfg_;
  AxiGrid g_;
  AnsatzState s_;
  ScalarField h_;
  Vec diag_lap_;
  Vec w_;
  double charge_target_ = 0.0;
  double flow_t_ = 1.0;
  int iterations_ = 0;
  ResidualNorms last_;
  std::string message_;
};

}  // namespace detail

/// Solves the coupled ansatz equations along cfg.q_path, warm-starting each
/// coupling from the previous one and halving the q step when a stage fails.
inline SolveOutcome solve(const SolverConfig& cfg) {
  cfg.validate();
  if (!validate_hypotheses(cfg.potential, 4.0, 4000).all_ok())
    throw std::invalid_argument("solve: potential fails the hypothesis checks");
  const AxiGrid g = cfg.grid();

  std::optional<RadialProfile> profile;
  if (cfg.mode == SolveMode::FixedOmega && cfg.ell == 0 && cfg.shooting_seed)
    profile = shoot_qball_1d(cfg.potential, cfg.omega);
  ScalarField seed = profile ? sample_radial_profile(g, *profile) : gaussian_seed(g, cfg.seed, cfg.ell);

  AnsatzState init(seed, ScalarField(g), ScalarField(g), cfg.omega, cfg.ell, 0.0, cfg.m_gen);
  detail::CoupledSolver solver(cfg, init);
  const SolveMode mode = cfg.mode;
  std::string failure;

  // Decoupled stage.
  bool ok = false;
  if (mode == SolveMode::FixedCharge) {
    solver.set_charge_target(cfg.charge_target);
    ok = solver.relax(mode, true);
  } else if (profile) {
    ok = solver.relax(mode, false);
  } else {
    // Reach a solution at some frequency through the charge-constrained flow,
    // then continue in omega to the requested value with Newton.
    solver.set_charge_target(cfg.omega * inner_axi(seed, seed));
    ok = solver.relax(SolveMode::FixedCharge, true);
    double step = 0.02;
    while (ok && solver.state().omega != cfg.omega) {
      const double cur = solver.state().omega;
      const double dist = cfg.omega - cur;
      const double next = std::abs(dist) <= step ? cfg.omega : cur + std::copysign(step, dist);
      const AnsatzState saved = solver.state();
      solver.state().omega = next;
      if (!solver.relax(SolveMode::FixedOmega, false)) {
        solver.state() = saved;
        step *= 0.5;
        if (step < 1e-5 || solver.cap_reached()) ok = false;
      }
    }
  }
  if (!ok) failure = "decoupled stage: " + solver.message();

  // Continuation in q.
  double q_cur = 0.0;
  for (std::size_t k = 1; ok && k < cfg.q_path.size(); ++k) {
    const double q_next = cfg.q_path[k];
    double dq = q_next - q_cur;
    while (ok && q_cur < q_next) {
      const double trial_q = std::min(q_next, q_cur + dq);
      const AnsatzState saved = solver.state();
      solver.state().q = trial_q;
      if (solver.relax(mode, false)) {
        q_cur = trial_q;
      } else {
        solver.state() = saved;
        dq *= 0.5;
        if (dq < cfg.min_q_step || solver.cap_reached()) {
          ok = false;
          failure = "continuation stalled at q = " + std::to_string(q_cur) + ": " + solver.message();
        }
      }
    }
  }

  AnsatzState& s = solver.state();
  const ResidualNorms res = residual_norms(s, cfg.potential);
  SolveReport rep;
  rep.residual_matter = res.matter;
  rep.residual_gauss = res.gauss;
  rep.residual_rotore = res.rotore;
  rep.relative_matter = res.matter_rel;
  rep.relative_gauss = res.gauss_rel;
  rep.relative_rotore = res.rotore_rel;
  rep.iterations = solver.iterations();
  rep.energy = energy_su2(s, cfg.potential);
  rep.charge = charge(s);
  rep.angular_momentum = angular_momentum_matter(s);
  rep.omega_final = s.omega;
  rep.q_final = s.q;
  rep.converged = ok;
  if (s.q == 0.0 && s.ell == 0) rep.pohozaev_defect = pohozaev_check(s, cfg.potential);
  rep.message = ok ? "converged" : failure;
  return {s, rep};
}

}  // namespace qvortex
