#pragma once

// Matrix-free Krylov solvers on std::vector<double>.

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace qvortex {

using Vec = std::vector<double>;

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t k = 0; k < x.size(); ++k) y[k] += alpha * x[k];
}

struct KrylovResult {
  int iterations = 0;
  /// Final residual norm relative to the right-hand side norm.
  double relative_residual = 0.0;
  bool converged = false;
};

/// Preconditioned conjugate gradients for SPD A. x holds the initial guess.
/// apply_a(x, y): y = A x.  apply_m(r, z): z = M^{-1} r with M SPD.
/// Convergence is declared on the true (unpreconditioned) residual.
template <class ApplyA, class ApplyM>
KrylovResult conjugate_gradient(ApplyA&& apply_a, ApplyM&& apply_m, const Vec& b, Vec& x, double tol,
                                int max_iter) {
  const std::size_t n = b.size();
  KrylovResult res;
  const double bnorm = std::sqrt(dot(b, b));
  if (bnorm == 0.0) {
    x.assign(n, 0.0);
    res.converged = true;
    return res;
  }
  Vec r(n), z(n), p(n), ap(n);
  apply_a(x, ap);
  for (std::size_t k = 0; k < n; ++k) r[k] = b[k] - ap[k];
  double rnorm = std::sqrt(dot(r, r));
  if (rnorm <= tol * bnorm) {
    res.relative_residual = rnorm / bnorm;
    res.converged = true;
    return res;
  }
  apply_m(r, z);
  p = z;
  double rz = dot(r, z);
  for (int it = 1; it <= max_iter; ++it) {
    apply_a(p, ap);
    const double pap = dot(p, ap);
    if (!(pap > 0.0)) break;
    const double alpha = rz / pap;
    axpy(alpha, p, x);
    axpy(-alpha, ap, r);
    rnorm = std::sqrt(dot(r, r));
    res.iterations = it;
    if (rnorm <= tol * bnorm) {
      res.converged = true;
      break;
    }
    apply_m(r, z);
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t k = 0; k < n; ++k) p[k] = z[k] + beta * p[k];
  }
  // Recompute the true residual; the recursive one drifts.
  apply_a(x, ap);
  for (std::size_t k = 0; k < n; ++k) r[k] = b[k] - ap[k];
  res.relative_residual = std::sqrt(dot(r, r)) / bnorm;
  res.converged = res.relative_residual <= tol;
  return res;
}

/// Preconditioned MINRES for symmetric (possibly indefinite) A, starting from
/// x = 0. The stopping test uses the preconditioned residual norm estimate.
template <class ApplyA, class ApplyM>
KrylovResult minres(ApplyA&& apply_a, ApplyM&& apply_m, const Vec& b, Vec& x, double tol, int max_iter) {
  const std::size_t n = b.size();
  KrylovResult res;
  x.assign(n, 0.0);
  Vec r1 = b;
  Vec y(n);
  apply_m(r1, y);
  const double beta1_sq = dot(r1, y);
  if (!(beta1_sq > 0.0)) {
    res.converged = beta1_sq == 0.0;
    return res;
  }
  const double beta1 = std::sqrt(beta1_sq);
  double beta = beta1;
  double oldb = 0.0;
  double dbar = 0.0;
  double epsln = 0.0;
  double phibar = beta1;
  double cs = -1.0;
  double sn = 0.0;
  Vec r2 = r1;
  Vec v(n), w(n, 0.0), w1(n, 0.0), w2(n, 0.0);
  const double eps = std::numeric_limits<double>::epsilon();

  for (int it = 1; it <= max_iter; ++it) {
    const double s = 1.0 / beta;
    for (std::size_t k = 0; k < n; ++k) v[k] = s * y[k];
    apply_a(v, y);
    if (it >= 2) axpy(-beta / oldb, r1, y);
    const double alfa = dot(v, y);
    axpy(-alfa / beta, r2, y);
    r1.swap(r2);
    r2 = y;
    apply_m(r2, y);
    oldb = beta;
    const double bsq = dot(r2, y);
    beta = bsq > 0.0 ? std::sqrt(bsq) : 0.0;

    const double oldeps = epsln;
    const double delta = cs * dbar + sn * alfa;
    const double gbar = sn * dbar - cs * alfa;
    epsln = sn * beta;
    dbar = -cs * beta;
    double gamma = std::hypot(gbar, beta);
    gamma = std::max(gamma, eps);
    cs = gbar / gamma;
    sn = beta / gamma;
    const double phi = cs * phibar;
    phibar = sn * phibar;

    const double denom = 1.0 / gamma;
    w1.swap(w2);
    w2.swap(w);
    for (std::size_t k = 0; k < n; ++k) w[k] = (v[k] - oldeps * w1[k] - delta * w2[k]) * denom;
    axpy(phi, w, x);

    res.iterations = it;
    res.relative_residual = phibar / beta1;
    if (res.relative_residual <= tol) {
      res.converged = true;
      break;
    }
    if (beta == 0.0) {
      res.converged = true;
      break;
    }
  }
  return res;
}

}  // namespace qvortex
