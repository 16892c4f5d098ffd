#pragma once

// Lagrangian densities in polar variables, conjugate momenta, the Noether
// energy density, and the integrated energies / charges of ansatz states.

#include <array>
#include <cmath>
#include <stdexcept>

#include "qvortex/axigrid.hpp"
#include "qvortex/potential.hpp"
#include "qvortex/su2_algebra.hpp"

namespace qvortex {

/// Solitary-wave ansatz psi = u(r, z) exp((l theta - omega t) tau_m) psi_0 with
/// Gamma_0 = gamma0(r, z) tau_m and (Gamma_1, Gamma_2, Gamma_3) = gamma(r, z) grad(theta) tau_m.
struct AnsatzState {
  ScalarField u;
  ScalarField gamma0;
  ScalarField gamma;
  double omega = 0.0;
  int ell = 0;
  double q = 0.0;
  int m_gen = 3;

  AnsatzState(ScalarField u_, ScalarField gamma0_, ScalarField gamma_, double omega_, int ell_, double q_,
              int m_gen_ = 3)
      : u(std::move(u_)),
        gamma0(std::move(gamma0_)),
        gamma(std::move(gamma_)),
        omega(omega_),
        ell(ell_),
        q(q_),
        m_gen(m_gen_) {
    require_same_grid(u, gamma0);
    require_same_grid(u, gamma);
    if (!(q >= 0.0)) throw std::invalid_argument("AnsatzState: q must be >= 0");
    if (m_gen < 1 || m_gen > 3) throw std::invalid_argument("AnsatzState: generator index must be 1, 2 or 3");
  }

  /// Zero gauge fields.
  static AnsatzState matter_only(ScalarField u_, double omega_, int ell_, double q_) {
    ScalarField zero(u_.grid());
    return AnsatzState(std::move(u_), zero, zero, omega_, ell_, q_);
  }

  const AxiGrid& grid() const { return u.grid(); }
};

/// Per-term energy decomposition; total is the sum of the seven parts.
struct EnergyBreakdown {
  double grad_u = 0.0;
  double omega_term = 0.0;
  double gamma0_term = 0.0;
  double vortex_term = 0.0;
  double potential_term = 0.0;
  double grad_gamma0_term = 0.0;
  double curl_gamma_term = 0.0;
  double total = 0.0;

  void sum_parts() {
    total = grad_u + omega_term + gamma0_term + vortex_term + potential_term + grad_gamma0_term +
            curl_gamma_term;
  }
};

/// Normalisation of the gauge part of a functional. In the SU(2) theory the
/// Killing-form norm doubles every field strength (||F||^2 = 2 |F|^2); the
/// U(1) normalisation is the classical Maxwell one.
enum class GaugeNormalization { SU2, U1 };

inline double gauge_weight(GaugeNormalization n) { return n == GaugeNormalization::SU2 ? 2.0 : 1.0; }

/// integral (1/2) u^2 [omega^2 - q^2 gamma0^2 + (l + q gamma)^2 / r^2]
///   + (1/2) |grad u|^2 + W(u) - |grad gamma0|^2 + |curl(gamma grad theta)|^2.
inline EnergyBreakdown energy_su2(const AnsatzState& s, const PotentialSpec& pot) {
  const AxiGrid& g = s.grid();
  EnergyBreakdown e;
  e.grad_u = 0.5 * dirichlet_energy(s.u);
  for (int i = 0; i < g.nr(); ++i) {
    const double w = g.weight(i);
    const double inv_r2 = 1.0 / (g.r(i) * g.r(i));
    double om = 0.0, g0 = 0.0, vx = 0.0, pt = 0.0;
    for (int j = 0; j < g.nz(); ++j) {
      const double u = s.u(i, j);
      const double u2 = u * u;
      const double a = s.ell + s.q * s.gamma(i, j);
      om += u2;
      g0 += s.gamma0(i, j) * s.gamma0(i, j) * u2;
      vx += a * a * u2 * inv_r2;
      pt += evaluate(pot, std::abs(u), 0);
    }
    e.omega_term += 0.5 * s.omega * s.omega * om * w;
    e.gamma0_term -= 0.5 * s.q * s.q * g0 * w;
    e.vortex_term += 0.5 * vx * w;
    e.potential_term += pt * w;
  }
  e.grad_gamma0_term = -dirichlet_energy(s.gamma0);
  e.curl_gamma_term = curl_energy(s.gamma);
  e.sum_parts();
  return e;
}

/// Abelian form with phi = -gamma0, A = gamma grad(theta):
///   integral (1/2)|grad u|^2 + (1/2)(q phi - omega)^2 u^2 + (1/2)|l grad(theta) + q A|^2 u^2
///   + W(u) + (k/2)|grad phi|^2 + (k/2)|curl A|^2,
/// with k = 2 for the SU(2) normalisation and k = 1 for the U(1) one. Every
/// part is nonnegative; gamma0_term is identically zero here. In the SU(2)
/// normalisation the total equals energy_su2 on states obeying the Gauss law,
/// and equals twice the U(1) energy of the pair (u / sqrt 2, f~).
inline EnergyBreakdown energy_abelian(const AnsatzState& s, const PotentialSpec& pot,
                                      GaugeNormalization norm = GaugeNormalization::SU2) {
  const AxiGrid& g = s.grid();
  const double k = gauge_weight(norm);
  EnergyBreakdown e;
  e.grad_u = 0.5 * dirichlet_energy(s.u);
  for (int i = 0; i < g.nr(); ++i) {
    const double w = g.weight(i);
    const double inv_r2 = 1.0 / (g.r(i) * g.r(i));
    double om = 0.0, vx = 0.0, pt = 0.0;
    for (int j = 0; j < g.nz(); ++j) {
      const double u = s.u(i, j);
      const double u2 = u * u;
      const double b = s.omega + s.q * s.gamma0(i, j);
      const double a = s.ell + s.q * s.gamma(i, j);
      om += b * b * u2;
      vx += a * a * u2 * inv_r2;
      pt += evaluate(pot, std::abs(u), 0);
    }
    e.omega_term += 0.5 * om * w;
    e.vortex_term += 0.5 * vx * w;
    e.potential_term += pt * w;
  }
  e.grad_gamma0_term = 0.5 * k * dirichlet_energy(s.gamma0);
  e.curl_gamma_term = 0.5 * k * curl_energy(s.gamma);
  e.sum_parts();
  return e;
}

/// Q = integral (omega + q gamma0) u^2 dx (positive for omega > 0 at small q).
inline double charge(const AnsatzState& s) {
  const AxiGrid& g = s.grid();
  double total = 0.0;
  for (int i = 0; i < g.nr(); ++i) {
    double column = 0.0;
    for (int j = 0; j < g.nz(); ++j) column += (s.omega + s.q * s.gamma0(i, j)) * s.u(i, j) * s.u(i, j);
    total += column * g.weight(i);
  }
  return total;
}

/// z-component of the matter angular momentum,
///   M_z = -integral (omega + q gamma0)(l + q gamma) u^2 dx,
/// using (x cross grad(theta))_z = 1.
inline double angular_momentum_matter(const AnsatzState& s) {
  const AxiGrid& g = s.grid();
  double total = 0.0;
  for (int i = 0; i < g.nr(); ++i) {
    double column = 0.0;
    for (int j = 0; j < g.nz(); ++j) {
      column += (s.omega + s.q * s.gamma0(i, j)) * (s.ell + s.q * s.gamma(i, j)) * s.u(i, j) * s.u(i, j);
    }
    total += column * g.weight(i);
  }
  return -total;
}

// ---------------------------------------------------------------------------
// Pointwise densities of the general (non-ansatz) polar formulation.

/// Pointwise arguments of the polar Lagrangian: psi = u exp(S) psi_0 and the
/// connection Gamma_j = sum_m gamma_{j,m} tau_m, j = 0..3.
struct PolarSample {
  double q = 0.0;
  double u = 0.0;
  double dt_u = 0.0;
  std::array<double, 3> grad_u{};
  Su2Vector s;
  Su2Vector dt_s;
  std::array<Su2Vector, 3> d_s{};  ///< d_s[j-1] = d_j S
  std::array<Su2Vector, 4> gamma{};  ///< Gamma_0 .. Gamma_3
  std::array<Su2Vector, 4> dt_gamma{};  ///< d_t Gamma_j; entry 0 does not enter L1
  std::array<std::array<Su2Vector, 4>, 3> d_gamma{};  ///< d_gamma[k-1][j] = d_k Gamma_j
};

namespace detail {

// d_t Gamma_j + d_j Gamma_0 + 2q Gamma_0 x Gamma_j, j = 1..3.
inline Su2Vector electric(const PolarSample& p, int j) {
  const auto uj = static_cast<std::size_t>(j);
  return p.dt_gamma[uj] + p.d_gamma[uj - 1][0] + 2.0 * p.q * cross(p.gamma[0], p.gamma[uj]);
}

// d_k Gamma_j - d_j Gamma_k - 2q Gamma_k x Gamma_j, k, j = 1..3.
inline Su2Vector magnetic(const PolarSample& p, int k, int j) {
  const auto uk = static_cast<std::size_t>(k);
  const auto uj = static_cast<std::size_t>(j);
  return p.d_gamma[uk - 1][uj] - p.d_gamma[uj - 1][uk] - 2.0 * p.q * cross(p.gamma[uk], p.gamma[uj]);
}

}  // namespace detail

/// L0 = |d_t u|^2 / 2 - |grad u|^2 / 2
///    + u^2 / 2 [ |C(S, d_t S) - q Gamma_0|^2 - sum_j |C(S, d_j S) + q Gamma_j|^2 ].
inline double lagrangian_l0(const PolarSample& p, TransportVariant variant) {
  const double grad2 = p.grad_u[0] * p.grad_u[0] + p.grad_u[1] * p.grad_u[1] + p.grad_u[2] * p.grad_u[2];
  const Su2Vector c0 = transport_coefficient(p.s, p.dt_s, variant) - p.q * p.gamma[0];
  double spatial = 0.0;
  for (std::size_t j = 1; j <= 3; ++j) {
    spatial += norm_sq(transport_coefficient(p.s, p.d_s[j - 1], variant) + p.q * p.gamma[j]);
  }
  return 0.5 * p.dt_u * p.dt_u - 0.5 * grad2 + 0.5 * p.u * p.u * (norm_sq(c0) - spatial);
}

/// L1 = sum_j |d_t Gamma_j + d_j Gamma_0 + 2q Gamma_0 x Gamma_j|^2
///    - 1/2 sum_{k,j} |d_k Gamma_j - d_j Gamma_k - 2q Gamma_k x Gamma_j|^2.
inline double lagrangian_l1(const PolarSample& p) {
  double el = 0.0;
  double mag = 0.0;
  for (int j = 1; j <= 3; ++j) {
    el += norm_sq(detail::electric(p, j));
    for (int k = 1; k <= 3; ++k) mag += norm_sq(detail::magnetic(p, k, j));
  }
  return el - 0.5 * mag;
}

/// L = L0 + L1 - W(u).
inline double lagrangian(const PolarSample& p, const PotentialSpec& pot, TransportVariant variant) {
  return lagrangian_l0(p, variant) + lagrangian_l1(p) - evaluate(pot, std::abs(p.u), 0);
}

/// dL/d(d_t u), dL/d(d_t S_m) and dL/d(d_t gamma_{j,m}) (j = 1..3; the
/// Lagrangian does not depend on d_t gamma_{0,m}).
struct ConjugateMomenta {
  double u = 0.0;
  Su2Vector s;
  std::array<std::array<double, 3>, 3> gamma{};  ///< gamma[j-1][m-1]
};

inline ConjugateMomenta appendix_momenta(const PolarSample& p, TransportVariant variant) {
  ConjugateMomenta out;
  out.u = p.dt_u;
  // C(S, X) = J X, so d/dX_m (1/2)|J X - q Gamma_0|^2 = (J^T (C - q Gamma_0))_m.
  const auto jac = transport_jacobian(p.s, variant);
  const Su2Vector c0 = transport_coefficient(p.s, p.dt_s, variant) - p.q * p.gamma[0];
  for (std::size_t m = 0; m < 3; ++m) {
    double acc = 0.0;
    for (std::size_t n = 0; n < 3; ++n) acc += c0[n] * jac[n][m];
    out.s[m] = p.u * p.u * acc;
  }
  for (int j = 1; j <= 3; ++j) {
    const Su2Vector e = detail::electric(p, j);
    for (std::size_t m = 0; m < 3; ++m) out.gamma[static_cast<std::size_t>(j) - 1][m] = 2.0 * e[m];
  }
  return out;
}

/// Energy density from time-translation invariance:
///   E = |d_t u|^2/2 + |grad u|^2/2 + u^2/2 [ |C_t - q Gamma_0|^2 + sum_j |C_j + q Gamma_j|^2 ]
///     + sum_j |E_j|^2 + 1/2 sum_{k,j} |F_kj|^2
///     + u^2 [ (q/2) <C_t, Gamma_0> - q^2 |Gamma_0|^2 ] + sum_j <F_0j, d_j Gamma_0 + 2q Gamma_0 x Gamma_j>
///     + W(u),
/// with <A, B> = 2 A . B the trace product, F_0j = -E_j, and C_t = C(S, d_t S).
inline double noether_energy_density(const PolarSample& p, const PotentialSpec& pot,
                                     TransportVariant variant) {
  const double grad2 = p.grad_u[0] * p.grad_u[0] + p.grad_u[1] * p.grad_u[1] + p.grad_u[2] * p.grad_u[2];
  const Su2Vector ct = transport_coefficient(p.s, p.dt_s, variant);
  double spatial = 0.0;
  for (std::size_t j = 1; j <= 3; ++j) {
    spatial += norm_sq(transport_coefficient(p.s, p.d_s[j - 1], variant) + p.q * p.gamma[j]);
  }
  const double u2 = p.u * p.u;
  double e = 0.5 * p.dt_u * p.dt_u + 0.5 * grad2 + 0.5 * u2 * (norm_sq(ct - p.q * p.gamma[0]) + spatial);
  double el = 0.0;
  double mag = 0.0;
  double cross_term = 0.0;
  for (int j = 1; j <= 3; ++j) {
    const Su2Vector ej = detail::electric(p, j);
    el += norm_sq(ej);
    for (int k = 1; k <= 3; ++k) mag += norm_sq(detail::magnetic(p, k, j));
    const auto uj = static_cast<std::size_t>(j);
    const Su2Vector bj = p.d_gamma[uj - 1][0] + 2.0 * p.q * cross(p.gamma[0], p.gamma[uj]);
    cross_term += 2.0 * dot(-ej, bj);
  }
  e += el + 0.5 * mag;
  e += u2 * (0.5 * p.q * 2.0 * dot(ct, p.gamma[0]) - p.q * p.q * norm_sq(p.gamma[0]));
  e += cross_term;
  e += evaluate(pot, std::abs(p.u), 0);
  return e;
}

}  // namespace qvortex
