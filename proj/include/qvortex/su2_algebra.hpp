#pragma once

// su(2) arithmetic in the basis tau_m = i * sigma_m, the closed-form
// exponential and the exponential-transport coefficient C(S, dS) defined by
//     d exp(S) = C(S, dS) exp(S).

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>

namespace qvortex {

/// Coefficients (s1, s2, s3) of S = s1 tau1 + s2 tau2 + s3 tau3.
struct Su2Vector {
  double s1 = 0.0;
  double s2 = 0.0;
  double s3 = 0.0;

  constexpr double operator[](std::size_t m) const { return m == 0 ? s1 : (m == 1 ? s2 : s3); }
  constexpr double& operator[](std::size_t m) { return m == 0 ? s1 : (m == 1 ? s2 : s3); }

  constexpr Su2Vector& operator+=(const Su2Vector& o) {
    s1 += o.s1;
    s2 += o.s2;
    s3 += o.s3;
    return *this;
  }
  constexpr Su2Vector& operator-=(const Su2Vector& o) {
    s1 -= o.s1;
    s2 -= o.s2;
    s3 -= o.s3;
    return *this;
  }
  constexpr Su2Vector& operator*=(double a) {
    s1 *= a;
    s2 *= a;
    s3 *= a;
    return *this;
  }

  friend constexpr Su2Vector operator+(Su2Vector a, const Su2Vector& b) { return a += b; }
  friend constexpr Su2Vector operator-(Su2Vector a, const Su2Vector& b) { return a -= b; }
  friend constexpr Su2Vector operator-(const Su2Vector& a) { return {-a.s1, -a.s2, -a.s3}; }
  friend constexpr Su2Vector operator*(double k, Su2Vector a) { return a *= k; }
  friend constexpr Su2Vector operator*(Su2Vector a, double k) { return a *= k; }
  friend constexpr bool operator==(const Su2Vector&, const Su2Vector&) = default;
};

/// S . S~ = s1 s1~ + s2 s2~ + s3 s3~ (one half of the trace product <S, S~>).
constexpr double dot(const Su2Vector& a, const Su2Vector& b) {
  return a.s1 * b.s1 + a.s2 * b.s2 + a.s3 * b.s3;
}

/// S x S~, the coefficient vector of -1/2 [S, S~].
constexpr Su2Vector cross(const Su2Vector& a, const Su2Vector& b) {
  return {a.s2 * b.s3 - a.s3 * b.s2, a.s3 * b.s1 - a.s1 * b.s3, a.s1 * b.s2 - a.s2 * b.s1};
}

constexpr double norm_sq(const Su2Vector& a) { return dot(a, a); }
inline double norm(const Su2Vector& a) { return std::sqrt(norm_sq(a)); }

/// Dense complex 2x2 matrix, row-major.
struct Mat2c {
  using value_type = std::complex<double>;
  std::array<value_type, 4> a{};

  constexpr value_type& operator()(int i, int j) { return a[static_cast<std::size_t>(2 * i + j)]; }
  constexpr const value_type& operator()(int i, int j) const {
    return a[static_cast<std::size_t>(2 * i + j)];
  }

  static constexpr Mat2c identity() {
    Mat2c m;
    m(0, 0) = 1.0;
    m(1, 1) = 1.0;
    return m;
  }

  constexpr Mat2c& operator+=(const Mat2c& o) {
    for (std::size_t k = 0; k < 4; ++k) a[k] += o.a[k];
    return *this;
  }
  constexpr Mat2c& operator-=(const Mat2c& o) {
    for (std::size_t k = 0; k < 4; ++k) a[k] -= o.a[k];
    return *this;
  }
  constexpr Mat2c& operator*=(value_type k) {
    for (auto& x : a) x *= k;
    return *this;
  }

  friend constexpr Mat2c operator+(Mat2c x, const Mat2c& y) { return x += y; }
  friend constexpr Mat2c operator-(Mat2c x, const Mat2c& y) { return x -= y; }
  friend constexpr Mat2c operator*(value_type k, Mat2c x) { return x *= k; }
  friend constexpr Mat2c operator*(const Mat2c& x, const Mat2c& y) {
    Mat2c r;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) r(i, j) = x(i, 0) * y(0, j) + x(i, 1) * y(1, j);
    return r;
  }

  constexpr value_type trace() const { return a[0] + a[3]; }
  constexpr value_type det() const { return a[0] * a[3] - a[1] * a[2]; }

  constexpr Mat2c adjoint() const {
    Mat2c r;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) r(i, j) = std::conj((*this)(j, i));
    return r;
  }

  /// Largest entry modulus.
  double max_abs() const {
    double m = 0.0;
    for (const auto& x : a) m = std::max(m, std::abs(x));
    return m;
  }
};

inline Mat2c commutator(const Mat2c& x, const Mat2c& y) { return x * y - y * x; }

/// tau_1 = i sigma_x, tau_2 = i sigma_y, tau_3 = i sigma_z.
inline Mat2c tau(int m) {
  using namespace std::complex_literals;
  Mat2c t;
  switch (m) {
    case 1:
      t(0, 1) = 1i;
      t(1, 0) = 1i;
      break;
    case 2:
      t(0, 1) = 1.0;
      t(1, 0) = -1.0;
      break;
    default:
      t(0, 0) = 1i;
      t(1, 1) = -1i;
      break;
  }
  return t;
}

/// Matrix form s1 tau1 + s2 tau2 + s3 tau3 (anti-Hermitian, traceless).
inline Mat2c to_matrix(const Su2Vector& s) {
  using namespace std::complex_literals;
  Mat2c m;
  m(0, 0) = 1i * s.s3;
  m(0, 1) = s.s2 + 1i * s.s1;
  m(1, 0) = -s.s2 + 1i * s.s1;
  m(1, 1) = -1i * s.s3;
  return m;
}

/// Inverse of to_matrix on su(2); the non-su(2) part of m is discarded.
inline Su2Vector from_matrix(const Mat2c& m) {
  // s_m = -1/2 tr(tau_m m)
  return {-0.5 * (tau(1) * m).trace().real(), -0.5 * (tau(2) * m).trace().real(),
          -0.5 * (tau(3) * m).trace().real()};
}

/// Matrix product of two algebra elements as (scalar, vector) with
/// S S~ = scalar * I + matrix(vector) = -(S . S~) I - S x S~.
struct ProductDecomposition {
  double scalar;
  Su2Vector vector;
};

constexpr ProductDecomposition mat_product_decompose(const Su2Vector& a, const Su2Vector& b) {
  return {-dot(a, b), -cross(a, b)};
}

namespace detail {
// sin(x)/x with its Taylor expansion near zero.
inline double sinc(double x) {
  if (std::abs(x) < 1e-4) {
    const double x2 = x * x;
    return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
  }
  return std::sin(x) / x;
}
}  // namespace detail

/// exp(S) = cos|S| I + (sin|S| / |S|) S, using S^2 = -|S|^2 I.
inline Mat2c exp_su2(const Su2Vector& s) {
  const double n = norm(s);
  Mat2c e = detail::sinc(n) * to_matrix(s);
  e(0, 0) += std::cos(n);
  e(1, 1) += std::cos(n);
  return e;
}

enum class TransportVariant {
  /// The constant coefficients (1 - cos 2)/2 and (2 - sin 2)/2, exact at |S| = 1.
  PaperConstants,
  /// The |S|-dependent resummation of the ad-series, exact for every S.
  GeneralCoefficients,
};

/// Coefficients (alpha, beta) of C(S, dS) = dS + alpha (dS x S) + beta ((dS x S) x S).
struct TransportCoefficients {
  double alpha;
  double beta;
};

/// alpha(s) = (1 - cos 2s) / (2 s^2) = (sin s / s)^2, beta(s) = (2s - sin 2s) / (2 s^3).
/// Below s = 0.5 beta is summed from sum_{n>=1} (-1)^(n+1) 4^n s^(2n-2) / (2n+1)!.
inline TransportCoefficients transport_coefficients(double s, TransportVariant variant) {
  if (variant == TransportVariant::PaperConstants) {
    return {0.5 * (1.0 - std::cos(2.0)), 0.5 * (2.0 - std::sin(2.0))};
  }
  const double s2 = s * s;
  const double alpha = detail::sinc(s) * detail::sinc(s);
  if (s < 0.5) {
    double term = 2.0 / 3.0;
    double beta = 0.0;
    for (int n = 1; n <= 14; ++n) {
      beta += term;
      term *= -4.0 * s2 / ((2.0 * n + 2.0) * (2.0 * n + 3.0));
    }
    return {alpha, beta};
  }
  return {alpha, (2.0 * s - std::sin(2.0 * s)) / (2.0 * s * s2)};
}

/// C(S, dS) with d exp(S) = C(S, dS) exp(S).
inline Su2Vector transport_coefficient(const Su2Vector& s, const Su2Vector& ds,
                                       TransportVariant variant) {
  const auto [alpha, beta] = transport_coefficients(norm(s), variant);
  const Su2Vector a = cross(ds, s);
  return ds + alpha * a + beta * cross(a, s);
}

/// Jacobian J(n, m) = d C(S, X)_n / d X_m; C is linear in X so C(S, X) = J X.
inline std::array<std::array<double, 3>, 3> transport_jacobian(const Su2Vector& s,
                                                               TransportVariant variant) {
  std::array<std::array<double, 3>, 3> jac{};
  for (std::size_t m = 0; m < 3; ++m) {
    Su2Vector e;
    e[m] = 1.0;
    const Su2Vector col = transport_coefficient(s, e, variant);
    for (std::size_t n = 0; n < 3; ++n) jac[n][m] = col[n];
  }
  return jac;
}

/// Partial sum sum_{k < n_terms} ad_S^k(dS) / (k+1)!, with ad_S(X) = [S, X] = 2 (X x S).
inline Su2Vector ad_series_dexp(const Su2Vector& s, const Su2Vector& ds, int n_terms) {
  Su2Vector term = ds;  // ad^k(dS) / (k+1)!
  Su2Vector sum;
  for (int k = 0; k < n_terms; ++k) {
    sum += term;
    term = (2.0 / static_cast<double>(k + 2)) * cross(term, s);
  }
  return sum;
}

}  // namespace qvortex
