#pragma once

// Cell-centred axisymmetric (r, z) grid and the discrete operators used by
// the field equations.
//
// Radial nodes r_i = (i + 1/2) dr, i = 0..nr-1, so the axis is a cell face and
// never a node. Axial nodes z_j = -z_half + (j + 1/2) dz. Outer faces
// (r = r_max, z = +-z_half) carry homogeneous Dirichlet data through the
// ghost rule f_ghost = -f_boundary_node.

#include <cmath>
#include <cstddef>
#include <functional>
#include <iomanip>
#include <istream>
#include <memory>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace qvortex {

class AxiGrid {
 public:
  AxiGrid(int nr, int nz, double dr, double dz) : nr_(nr), nz_(nz), dr_(dr), dz_(dz) {
    if (nr < 8 || nz < 8) throw std::invalid_argument("AxiGrid: nr and nz must be >= 8");
    if (!(dr > 0.0) || !(dz > 0.0)) throw std::invalid_argument("AxiGrid: spacings must be > 0");
  }

  /// Grid with the given extents: r in (0, r_max), z in (-z_half, z_half).
  static AxiGrid from_extent(int nr, int nz, double r_max, double z_half) {
    return AxiGrid(nr, nz, r_max / nr, 2.0 * z_half / nz);
  }

  int nr() const { return nr_; }
  int nz() const { return nz_; }
  double dr() const { return dr_; }
  double dz() const { return dz_; }
  double r_max() const { return nr_ * dr_; }
  double z_half() const { return 0.5 * nz_ * dz_; }
  std::size_t size() const { return static_cast<std::size_t>(nr_) * static_cast<std::size_t>(nz_); }

  double r(int i) const { return (i + 0.5) * dr_; }
  double z(int j) const { return -z_half() + (j + 0.5) * dz_; }
  /// Radius of the face between nodes i and i+1 (face -1/2 is the axis).
  double r_face(int i) const { return (i + 1) * dr_; }

  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(nr_) + static_cast<std::size_t>(i);
  }

  /// Quadrature weight 2 pi r_i dr dz of node (i, j).
  double weight(int i) const { return 2.0 * std::numbers::pi * r(i) * dr_ * dz_; }

  friend bool operator==(const AxiGrid& a, const AxiGrid& b) {
    return a.nr_ == b.nr_ && a.nz_ == b.nz_ && a.dr_ == b.dr_ && a.dz_ == b.dz_;
  }

 private:
  int nr_;
  int nz_;
  double dr_;
  double dz_;
};

/// Real field on an AxiGrid; entries stored z-major (index j * nr + i).
class ScalarField {
 public:
  explicit ScalarField(const AxiGrid& grid) : grid_(grid), v_(grid.size(), 0.0) {}

  ScalarField(const AxiGrid& grid, std::vector<double> values) : grid_(grid), v_(std::move(values)) {
    if (v_.size() != grid_.size()) throw std::invalid_argument("ScalarField: size mismatch");
    for (double x : v_) {
      if (!std::isfinite(x)) throw std::invalid_argument("ScalarField: non-finite entry");
    }
  }

  /// Samples g(r, z) at every node.
  template <class G>
  static ScalarField sample(const AxiGrid& grid, G&& g) {
    std::vector<double> v(grid.size());
    for (int j = 0; j < grid.nz(); ++j)
      for (int i = 0; i < grid.nr(); ++i) v[grid.index(i, j)] = g(grid.r(i), grid.z(j));
    return ScalarField(grid, std::move(v));
  }

  const AxiGrid& grid() const { return grid_; }
  std::size_t size() const { return v_.size(); }

  double operator()(int i, int j) const { return v_[grid_.index(i, j)]; }
  double& operator()(int i, int j) { return v_[grid_.index(i, j)]; }
  double operator[](std::size_t k) const { return v_[k]; }
  double& operator[](std::size_t k) { return v_[k]; }

  const std::vector<double>& values() const { return v_; }
  std::vector<double>& values() { return v_; }

  ScalarField& operator+=(const ScalarField& o) {
    for (std::size_t k = 0; k < v_.size(); ++k) v_[k] += o.v_[k];
    return *this;
  }
  ScalarField& operator-=(const ScalarField& o) {
    for (std::size_t k = 0; k < v_.size(); ++k) v_[k] -= o.v_[k];
    return *this;
  }
  ScalarField& operator*=(double a) {
    for (auto& x : v_) x *= a;
    return *this;
  }
  friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
  friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
  friend ScalarField operator*(double k, ScalarField a) { return a *= k; }

  double max_abs() const {
    double m = 0.0;
    for (double x : v_) m = std::max(m, std::abs(x));
    return m;
  }

 private:
  AxiGrid grid_;
  std::vector<double> v_;
};

inline void require_same_grid(const ScalarField& a, const ScalarField& b) {
  if (!(a.grid() == b.grid())) throw std::invalid_argument("fields live on different grids");
}

/// Boundary data g(r, z) for the outer faces; the axis never needs data.
using BoundaryValues = std::function<double(double r, double z)>;

namespace detail {

// Ghost values across the outer faces: 2 g - f (g = 0 for homogeneous data).
struct Ghosts {
  const ScalarField& f;
  const BoundaryValues* bc;

  double outer_r(int j) const {
    const AxiGrid& g = f.grid();
    const double fb = f(g.nr() - 1, j);
    return bc ? 2.0 * (*bc)(g.r_max(), g.z(j)) - fb : -fb;
  }
  double lower_z(int i) const {
    const AxiGrid& g = f.grid();
    const double fb = f(i, 0);
    return bc ? 2.0 * (*bc)(g.r(i), -g.z_half()) - fb : -fb;
  }
  double upper_z(int i) const {
    const AxiGrid& g = f.grid();
    const double fb = f(i, g.nz() - 1);
    return bc ? 2.0 * (*bc)(g.r(i), g.z_half()) - fb : -fb;
  }
};

inline ScalarField laplace_impl(const ScalarField& f, const BoundaryValues* bc) {
  const AxiGrid& g = f.grid();
  const int nr = g.nr();
  const int nz = g.nz();
  const double idr2 = 1.0 / (g.dr() * g.dr());
  const double idz2 = 1.0 / (g.dz() * g.dz());
  const Ghosts gh{f, bc};
  ScalarField out(g);
  for (int j = 0; j < nz; ++j) {
    for (int i = 0; i < nr; ++i) {
      const double fc = f(i, j);
      const double fr = i + 1 < nr ? f(i + 1, j) : gh.outer_r(j);
      const double fl = i > 0 ? f(i - 1, j) : fc;  // zero flux through the axis
      const double fu = j + 1 < nz ? f(i, j + 1) : gh.upper_z(i);
      const double fd = j > 0 ? f(i, j - 1) : gh.lower_z(i);
      const double ri = g.r(i);
      const double radial = (g.r_face(i) * (fr - fc) - g.r_face(i - 1) * (fc - fl)) * idr2 / ri;
      out(i, j) = radial + (fu - 2.0 * fc + fd) * idz2;
    }
  }
  return out;
}

inline ScalarField curlcurl_impl(const ScalarField& gam, const BoundaryValues* bc) {
  const AxiGrid& g = gam.grid();
  const int nr = g.nr();
  const int nz = g.nz();
  const double dr = g.dr();
  const double idz2 = 1.0 / (g.dz() * g.dz());
  const Ghosts gh{gam, bc};
  ScalarField out(g);
  for (int j = 0; j < nz; ++j) {
    for (int i = 0; i < nr; ++i) {
      const double c = gam(i, j);
      const double right = i + 1 < nr ? gam(i + 1, j) : gh.outer_r(j);
      const double flux_r = (right - c) / (g.r_face(i) * dr);
      // Axis closure for gamma ~ r^2: (1/r) d gamma/dr -> 2 gamma_0 / r_0^2.
      const double flux_l = i > 0 ? (c - gam(i - 1, j)) / (g.r_face(i - 1) * dr) : 8.0 * c / (dr * dr);
      const double up = j + 1 < nz ? gam(i, j + 1) : gh.upper_z(i);
      const double down = j > 0 ? gam(i, j - 1) : gh.lower_z(i);
      out(i, j) = -(g.r(i) * (flux_r - flux_l) / dr + (up - 2.0 * c + down) * idz2);
    }
  }
  return out;
}

}  // namespace detail

/// Axisymmetric Laplacian f_rr + f_r / r + f_zz in conservative form
/// (1/r) d/dr (r df/dr) + d2f/dz2, zero flux through the axis.
inline ScalarField laplace_axi(const ScalarField& f) { return detail::laplace_impl(f, nullptr); }

/// Same operator with inhomogeneous Dirichlet data on the outer faces.
inline ScalarField laplace_axi(const ScalarField& f, const BoundaryValues& bc) {
  return detail::laplace_impl(f, &bc);
}

/// Coefficient of grad(theta) in curl curl (gamma grad(theta)):
///     -gamma_rr + gamma_r / r - gamma_zz,
/// discretised as -(r d/dr((1/r) d gamma/dr) + gamma_zz). gamma must vanish
/// like r^2 on the axis.
inline ScalarField curlcurl_theta(const ScalarField& gamma) { return detail::curlcurl_impl(gamma, nullptr); }

inline ScalarField curlcurl_theta(const ScalarField& gamma, const BoundaryValues& bc) {
  return detail::curlcurl_impl(gamma, &bc);
}

/// sum f(i, j) 2 pi r_i dr dz, accumulated in a fixed order.
inline double integrate_axi(const ScalarField& f) {
  const AxiGrid& g = f.grid();
  double total = 0.0;
  for (int i = 0; i < g.nr(); ++i) {
    double column = 0.0;
    for (int j = 0; j < g.nz(); ++j) column += f(i, j);
    total += column * g.weight(i);
  }
  return total;
}

/// Weighted inner product integral of a * b.
inline double inner_axi(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a, b);
  const AxiGrid& g = a.grid();
  double total = 0.0;
  for (int i = 0; i < g.nr(); ++i) {
    double column = 0.0;
    for (int j = 0; j < g.nz(); ++j) column += a(i, j) * b(i, j);
    total += column * g.weight(i);
  }
  return total;
}

/// Discrete L2 norm sqrt(integral f^2).
inline double l2_norm(const ScalarField& f) { return std::sqrt(inner_axi(f, f)); }

/// Discrete Dirichlet energy integral |grad f|^2, defined as integral f (-laplace f)
/// so that summation by parts holds exactly.
inline double dirichlet_energy(const ScalarField& f) {
  ScalarField lap = laplace_axi(f);
  return -inner_axi(f, lap);
}

/// integral |curl(gamma grad theta)|^2 dx = integral |grad gamma|^2 / r^2 dx,
/// evaluated as integral gamma curlcurl_theta(gamma) / r^2.
inline double curl_energy(const ScalarField& gamma) {
  const AxiGrid& g = gamma.grid();
  ScalarField cc = curlcurl_theta(gamma);
  double total = 0.0;
  for (int i = 0; i < g.nr(); ++i) {
    double column = 0.0;
    for (int j = 0; j < g.nz(); ++j) column += gamma(i, j) * cc(i, j);
    total += column * g.weight(i) / (g.r(i) * g.r(i));
  }
  return total;
}

/// integral [ |grad u|^2 + (1 + l^2 / r^2) u^2 ] dx.
inline double weighted_h1_norm_sq(const ScalarField& u, int ell) {
  const AxiGrid& g = u.grid();
  const double l2 = static_cast<double>(ell) * ell;
  double total = dirichlet_energy(u);
  for (int i = 0; i < g.nr(); ++i) {
    const double factor = 1.0 + l2 / (g.r(i) * g.r(i));
    double column = 0.0;
    for (int j = 0; j < g.nz(); ++j) column += u(i, j) * u(i, j);
    total += factor * column * g.weight(i);
  }
  return total;
}

/// CSV with header "r,z,value", z-major, 17 significant digits.
inline void write_csv(std::ostream& os, const ScalarField& f) {
  const AxiGrid& g = f.grid();
  os << "r,z,value\n";
  os << std::setprecision(17);
  for (int j = 0; j < g.nz(); ++j)
    for (int i = 0; i < g.nr(); ++i) os << g.r(i) << ',' << g.z(j) << ',' << f(i, j) << '\n';
}

/// Reads a field written by write_csv onto a known grid.
inline ScalarField read_csv(std::istream& is, const AxiGrid& grid) {
  std::string line;
  if (!std::getline(is, line) || line != "r,z,value") throw std::runtime_error("read_csv: bad header");
  std::vector<double> v;
  v.reserve(grid.size());
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto last = line.rfind(',');
    if (last == std::string::npos) throw std::runtime_error("read_csv: malformed row");
    v.push_back(std::stod(line.substr(last + 1)));
  }
  if (v.size() != grid.size()) throw std::runtime_error("read_csv: wrong number of rows");
  return ScalarField(grid, std::move(v));
}

}  // namespace qvortex
