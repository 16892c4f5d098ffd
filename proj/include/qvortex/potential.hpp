#pragma once

// Self-interaction W(psi) = f(|psi|) of the matter field.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace qvortex {

/// f(s) = m^2 s^2 / 2 - b s^4 + c s^6.
struct Sextic {
  double m_sq = 1.0;
  double b = 1.0;
  double c = 0.75;
  friend bool operator==(const Sextic&, const Sextic&) = default;
};

/// f(s) = (lambda / 4) (s^2 - v^2)^2.
struct Higgs {
  double v = 1.0;
  double lambda = 1.0;
  friend bool operator==(const Higgs&, const Higgs&) = default;
};

/// Cubic spline through (s_k, f_k), clamped to f'(0) = 0 at the origin and
/// natural (f'' = 0) at the last node. The first node is s = 0 with f = 0;
/// beyond the last node the end cubic is continued.
class Tabulated {
 public:
  Tabulated(std::vector<double> s, std::vector<double> f) : s_(std::move(s)), f_(std::move(f)) {
    if (s_.size() != f_.size()) throw std::invalid_argument("tabulated potential: size mismatch");
    if (s_.empty() || s_.front() > 0.0) {
      s_.insert(s_.begin(), 0.0);
      f_.insert(f_.begin(), 0.0);
    }
    if (s_.size() < 3) throw std::invalid_argument("tabulated potential: need at least 3 nodes");
    if (s_.front() != 0.0) throw std::invalid_argument("tabulated potential: nodes must be >= 0");
    if (f_.front() != 0.0) throw std::invalid_argument("tabulated potential: f(0) must be 0");
    for (std::size_t k = 1; k < s_.size(); ++k) {
      if (!(s_[k] > s_[k - 1])) throw std::invalid_argument("tabulated potential: nodes must increase");
    }
    for (double v : f_) {
      if (!std::isfinite(v)) throw std::invalid_argument("tabulated potential: non-finite value");
    }
    build_second_derivatives();
  }

  const std::vector<double>& nodes() const { return s_; }
  const std::vector<double>& values() const { return f_; }

  /// order 0, 1 or 2 derivative at s >= 0.
  double evaluate(double s, int order) const {
    if (order == 1 && s == 0.0) return 0.0;  // the clamped end condition
    const std::size_t n = s_.size();
    std::size_t k = static_cast<std::size_t>(std::upper_bound(s_.begin(), s_.end(), s) - s_.begin());
    k = std::clamp<std::size_t>(k, 1, n - 1) - 1;  // segment [k, k+1]
    const double h = s_[k + 1] - s_[k];
    const double a = (s_[k + 1] - s) / h;
    const double b = (s - s_[k]) / h;
    const double m0 = m_[k];
    const double m1 = m_[k + 1];
    switch (order) {
      case 0:
        return a * f_[k] + b * f_[k + 1] + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
      case 1:
        return (f_[k + 1] - f_[k]) / h - (3.0 * a * a - 1.0) * h * m0 / 6.0 +
               (3.0 * b * b - 1.0) * h * m1 / 6.0;
      default:
        return a * m0 + b * m1;
    }
  }

  friend bool operator==(const Tabulated& x, const Tabulated& y) { return x.s_ == y.s_ && x.f_ == y.f_; }

 private:
  // Solves the tridiagonal moment system: clamped slope 0 at s_0, natural at s_{n-1}.
  void build_second_derivatives() {
    const std::size_t n = s_.size();
    std::vector<double> diag(n), upper(n, 0.0), lower(n, 0.0), rhs(n, 0.0);
    const double h0 = s_[1] - s_[0];
    diag[0] = h0 / 3.0;
    upper[0] = h0 / 6.0;
    rhs[0] = (f_[1] - f_[0]) / h0;  // minus f'(0) = 0
    for (std::size_t k = 1; k + 1 < n; ++k) {
      const double hl = s_[k] - s_[k - 1];
      const double hr = s_[k + 1] - s_[k];
      lower[k] = hl / 6.0;
      diag[k] = (hl + hr) / 3.0;
      upper[k] = hr / 6.0;
      rhs[k] = (f_[k + 1] - f_[k]) / hr - (f_[k] - f_[k - 1]) / hl;
    }
    diag[n - 1] = 1.0;
    rhs[n - 1] = 0.0;
    // Thomas algorithm.
    for (std::size_t k = 1; k < n; ++k) {
      const double w = lower[k] / diag[k - 1];
      diag[k] -= w * upper[k - 1];
      rhs[k] -= w * rhs[k - 1];
    }
    m_.assign(n, 0.0);
    m_[n - 1] = rhs[n - 1] / diag[n - 1];
    for (std::size_t k = n - 1; k-- > 0;) m_[k] = (rhs[k] - upper[k] * m_[k + 1]) / diag[k];
  }

  std::vector<double> s_;
  std::vector<double> f_;
  std::vector<double> m_;  // second derivatives at the nodes
};

using PotentialSpec = std::variant<Sextic, Higgs, Tabulated>;

inline PotentialSpec default_potential() { return Sextic{1.0, 1.0, 0.75}; }

inline std::string family_name(const PotentialSpec& spec) {
  switch (spec.index()) {
    case 0:
      return "sextic";
    case 1:
      return "higgs";
    default:
      return "tabulated";
  }
}

/// f, f' or f'' at s >= 0.
inline double evaluate(const PotentialSpec& spec, double s, int order) {
  if (!(s >= 0.0)) throw std::domain_error("potential: argument must be >= 0");
  if (order < 0 || order > 2) throw std::invalid_argument("potential: order must be 0, 1 or 2");
  struct Visitor {
    double s;
    int order;
    double operator()(const Sextic& p) const {
      const double s2 = s * s;
      switch (order) {
        case 0:
          return s2 * (0.5 * p.m_sq + s2 * (-p.b + p.c * s2));
        case 1:
          return s * (p.m_sq + s2 * (-4.0 * p.b + 6.0 * p.c * s2));
        default:
          return p.m_sq + s2 * (-12.0 * p.b + 30.0 * p.c * s2);
      }
    }
    double operator()(const Higgs& p) const {
      const double d = s * s - p.v * p.v;
      switch (order) {
        case 0:
          return 0.25 * p.lambda * d * d;
        case 1:
          return p.lambda * s * d;
        default:
          return p.lambda * (3.0 * s * s - p.v * p.v);
      }
    }
    double operator()(const Tabulated& p) const { return p.evaluate(s, order); }
  };
  return std::visit(Visitor{s, order}, spec);
}

/// W'(u) for a real amplitude of either sign: sign(u) f'(|u|).
inline double signed_derivative(const PotentialSpec& spec, double u) {
  const double d = evaluate(spec, std::abs(u), 1);
  return u < 0.0 ? -d : d;
}

/// m^2 = f''(0).
inline double mass_squared(const PotentialSpec& spec) { return evaluate(spec, 0.0, 2); }

struct HypothesisReport {
  bool w1_ok = false;
  bool w2_ok = false;
  bool w3_ok = false;
  bool w4_ok = false;
  std::optional<double> witness_s0;
  std::optional<double> witness_s1;
  /// First point where a hypothesis was seen to fail (W1 minimum, or 0 for W2).
  std::optional<double> failure_location;
  double m_sq = 0.0;

  bool all_ok() const { return w1_ok && w2_ok && w3_ok && w4_ok; }
};

namespace detail {

// Golden-section minimisation of g on [a, b].
template <class G>
double golden_min(G&& g, double a, double b, double tol = 1e-13) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double gc = g(c);
  double gd = g(d);
  while (b - a > tol * std::max(1.0, std::abs(a) + std::abs(b))) {
    if (gc < gd) {
      b = d;
      d = c;
      gd = gc;
      c = b - inv_phi * (b - a);
      gc = g(c);
    } else {
      a = c;
      c = d;
      gc = gd;
      d = a + inv_phi * (b - a);
      gd = g(d);
    }
  }
  return 0.5 * (a + b);
}

// Smallest point of the coarsest dyadic lattice k * 2^-level in (lo, s_max]
// satisfying pred, scanning levels 0, 1, ... until the spacing drops below
// min_spacing.
template <class P>
std::optional<double> dyadic_witness(P&& pred, double lo, double s_max, double min_spacing) {
  for (int level = 0;; ++level) {
    const double h = std::ldexp(1.0, -level);
    if (h < min_spacing) break;
    const long k_lo = static_cast<long>(std::floor(lo / h)) + 1;
    const long k_hi = static_cast<long>(std::floor(s_max / h));
    for (long k = k_lo; k <= k_hi; ++k) {
      const double s = static_cast<double>(k) * h;
      if (s > lo && pred(s)) return s;
    }
  }
  return std::nullopt;
}

}  // namespace detail

/// Checks the four hypotheses on the matter self-interaction:
///   (W1) f >= 0,  (W2) f(0) = f'(0) = 0 < f''(0) = m^2,
///   (W3) f(s0) < m^2 s0^2 / 2 for some s0,  (W4) f'(s1) >= s1 for some s1 > s0.
/// W1 is sampled on [0, s_max] and every sampled local minimum is refined by
/// golden section. Witnesses are the smallest qualifying points of the
/// coarsest dyadic lattice k 2^-l, so simple values are reported when they work.
inline HypothesisReport validate_hypotheses(const PotentialSpec& spec, double s_max, int n_samples) {
  if (!(s_max > 0.0)) throw std::invalid_argument("validate_hypotheses: s_max must be > 0");
  if (n_samples < 100) throw std::invalid_argument("validate_hypotheses: n_samples must be >= 100");
  HypothesisReport rep;
  const auto f = [&](double s) { return evaluate(spec, s, 0); };
  const double h = s_max / n_samples;

  // W1
  rep.w1_ok = true;
  double worst_s = 0.0;
  double worst_f = f(0.0);
  std::vector<double> vals(static_cast<std::size_t>(n_samples) + 1);
  for (int k = 0; k <= n_samples; ++k) vals[static_cast<std::size_t>(k)] = f(k * h);
  for (int k = 0; k <= n_samples; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    double s = k * h;
    double v = vals[uk];
    const bool left_ok = k == 0 || vals[uk - 1] >= v;
    const bool right_ok = k == n_samples || vals[uk + 1] >= v;
    if (left_ok && right_ok && k > 0 && k < n_samples) {
      s = detail::golden_min(f, (k - 1) * h, (k + 1) * h);
      v = std::min(v, f(s));
    }
    if (v < worst_f) {
      worst_f = v;
      worst_s = s;
    }
  }
  if (worst_f < 0.0) {
    rep.w1_ok = false;
    rep.failure_location = worst_s;
  }

  // W2
  const double f0 = f(0.0);
  const double d0 = evaluate(spec, 0.0, 1);
  rep.m_sq = evaluate(spec, 0.0, 2);
  rep.w2_ok = f0 == 0.0 && d0 == 0.0 && rep.m_sq > 0.0;
  if (!rep.w2_ok && !rep.failure_location) rep.failure_location = 0.0;

  // W3, W4
  const double m_sq = rep.m_sq;
  const double min_spacing = h;
  if (m_sq > 0.0) {
    rep.witness_s0 = detail::dyadic_witness([&](double s) { return f(s) < 0.5 * m_sq * s * s; }, 0.0,
                                            s_max, min_spacing);
  }
  rep.w3_ok = rep.witness_s0.has_value();
  if (rep.w3_ok) {
    rep.witness_s1 = detail::dyadic_witness([&](double s) { return evaluate(spec, s, 1) >= s; },
                                            *rep.witness_s0, s_max, min_spacing);
  }
  rep.w4_ok = rep.witness_s1.has_value();
  return rep;
}

/// Direct check of a given witness pair.
inline bool witnesses_hold(const PotentialSpec& spec, double s0, double s1) {
  const double m_sq = mass_squared(spec);
  return s0 > 0.0 && s1 > s0 && evaluate(spec, s0, 0) < 0.5 * m_sq * s0 * s0 &&
         evaluate(spec, s1, 1) >= s1;
}

struct HiggsDetection {
  bool is_higgs = false;
  std::optional<double> s_bar;
};

/// Higgs-type: f >= 0 on the samples, f(0) > 0 and f vanishes at some
/// s_bar in (0, s_max]. The zero is a minimum of a nonnegative f, so it is
/// located by bisection on the sign change of f' and accepted when f(s_bar)
/// is zero up to rounding.
inline HiggsDetection is_higgs_type(const PotentialSpec& spec, double s_max, int n_samples = 4096) {
  if (!(s_max > 0.0)) throw std::invalid_argument("is_higgs_type: s_max must be > 0");
  HiggsDetection out;
  const auto f = [&](double s) { return evaluate(spec, s, 0); };
  const auto df = [&](double s) { return evaluate(spec, s, 1); };
  const double f0 = f(0.0);
  if (!(f0 > 0.0)) return out;
  const double h = s_max / n_samples;
  double fmax = f0;
  for (int k = 0; k <= n_samples; ++k) {
    const double v = f(k * h);
    if (v < 0.0) return out;
    fmax = std::max(fmax, v);
  }
  const double zero_tol = 1e-12 * fmax;
  for (int k = 1; k <= n_samples; ++k) {
    double a = (k - 1) * h;
    double b = k * h;
    if (f(b) <= zero_tol && std::abs(df(b)) == 0.0) {
      out.is_higgs = true;
      out.s_bar = b;
      return out;
    }
    if (!(df(a) < 0.0 && df(b) >= 0.0)) continue;
    while (b - a > 1e-13) {
      const double mid = 0.5 * (a + b);
      if (df(mid) < 0.0) {
        a = mid;
      } else {
        b = mid;
      }
    }
    const double s = 0.5 * (a + b);
    if (f(s) <= zero_tol) {
      out.is_higgs = true;
      out.s_bar = s;
      return out;
    }
  }
  return out;
}

/// f~(s) = f(sqrt(2) s) / 2.
inline PotentialSpec reduce_potential(const PotentialSpec& spec) {
  if (const auto* p = std::get_if<Sextic>(&spec)) return Sextic{p->m_sq, 2.0 * p->b, 4.0 * p->c};
  if (const auto* p = std::get_if<Tabulated>(&spec)) {
    std::vector<double> s = p->nodes();
    std::vector<double> f = p->values();
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (auto& x : s) x *= inv_sqrt2;
    for (auto& x : f) x *= 0.5;
    return Tabulated(std::move(s), std::move(f));
  }
  throw std::invalid_argument("reduce_potential: Higgs-type potentials are not reduced");
}

}  // namespace qvortex
