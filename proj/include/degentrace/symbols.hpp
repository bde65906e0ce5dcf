#pragma once

// Principal symbols with a totally degenerate critical point at the origin
// of phase space: p0 = E_c + sum_j p_j with p_j homogeneous of degree j and
// the first non-zero component p_k (k > 2) definite on the unit sphere.
//
// Phase-space variables are ordered (x_1..x_n, xi_1..xi_n). The critical
// point is always the origin; callers translate their symbol first.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "degentrace/errors.hpp"
#include "degentrace/jets.hpp"
#include "degentrace/quadrature.hpp"

namespace degentrace {

enum class Extremum { Minimum, Maximum };

inline const char* to_string(Extremum e) { return e == Extremum::Minimum ? "minimum" : "maximum"; }

// Minimum ratio min|p_k| / max|p_k| over the sphere sample accepted as definite.
inline constexpr double kDefinitenessMargin = 1e-9;

namespace sphere {

// Quasi-uniform sample of S^{2n-1}: equispaced angles for n = 1, a Halton
// sequence pushed through Hopf coordinates (uniform measure) for n = 2.
inline std::vector<std::vector<double>> sample(int n) {
  std::vector<std::vector<double>> pts;
  if (n == 1) {
    constexpr int kCount = 4096;
    for (int i = 0; i < kCount; ++i) {
      const double th = 2.0 * std::numbers::pi * i / kCount;
      pts.push_back({std::cos(th), std::sin(th)});
    }
  } else if (n == 2) {
    constexpr int kCount = 131072;
    auto radical_inverse = [](unsigned i, unsigned base) {
      double inv = 1.0 / base, f = inv, r = 0.0;
      while (i > 0) {
        r += f * (i % base);
        i /= base;
        f *= inv;
      }
      return r;
    };
    // The poles of the Hopf chart are included explicitly.
    pts.push_back({1, 0, 0, 0});
    pts.push_back({0, 0, 1, 0});
    for (unsigned i = 1; i <= kCount; ++i) {
      const double u = radical_inverse(i, 2);
      const double a = 2.0 * std::numbers::pi * radical_inverse(i, 3);
      const double b = 2.0 * std::numbers::pi * radical_inverse(i, 5);
      const double ru = std::sqrt(u), rv = std::sqrt(1.0 - u);
      pts.push_back({ru * std::cos(a), ru * std::sin(a), rv * std::cos(b), rv * std::sin(b)});
    }
  } else {
    throw DomainError("sphere sampling supports n = 1 or n = 2 only");
  }
  return pts;
}

}  // namespace sphere

class SymbolModel {
 public:
  int n() const { return n_; }
  int phase_dim() const { return 2 * n_; }
  double critical_energy() const { return ec_; }
  double p1() const { return p1_; }
  int k() const { return k_; }
  // Highest degree for which Taylor data is available (components above the
  // largest stored degree are zero up to this order).
  int order() const { return order_; }
  Extremum extremum() const { return extremum_; }

  const std::map<int, Jet>& components() const { return components_; }
  Jet component(int degree) const {
    auto it = components_.find(degree);
    return it == components_.end() ? Jet(phase_dim(), order_) : it->second;
  }
  const Jet& leading() const { return components_.at(k_); }

  // p0 = E_c + sum of components of degree <= order, as a jet of that order.
  Jet principal(int order) const {
    Jet p = Jet::constant(phase_dim(), order, ec_);
    for (const auto& [deg, c] : components_)
      if (deg <= order) p += c.with_order(order);
    return p;
  }
  // p0 - E_c - p_k.
  Jet remainder_above_leading(int order) const {
    Jet r(phase_dim(), order);
    for (const auto& [deg, c] : components_)
      if (deg > k_ && deg <= order) r += c.with_order(order);
    return r;
  }

  double leading_at(std::span<const double> theta) const { return leading().eval(theta); }

 private:
  friend SymbolModel make_symbol(int, double, std::vector<Jet>, double, int);
  int n_ = 1;
  double ec_ = 0.0;
  double p1_ = 0.0;
  int k_ = 0;
  int order_ = 0;
  Extremum extremum_ = Extremum::Minimum;
  std::map<int, Jet> components_;
};

inline std::string format_direction(const std::vector<double>& th) {
  std::ostringstream os;
  os.precision(6);
  os << "theta=(";
  for (std::size_t i = 0; i < th.size(); ++i) os << (i ? ", " : "") << th[i];
  os << ")";
  return os.str();
}

// Builds and validates a symbol. order < 0 means "largest component degree".
inline SymbolModel make_symbol(int n, double ec, std::vector<Jet> components, double p1,
                               int order = -1) {
  if (n < 1 || n > 2) throw DomainError("only n = 1 or n = 2 degrees of freedom are supported");
  if (components.empty()) throw DomainError("symbol needs at least one homogeneous component");
  const int dim = 2 * n;
  int max_deg = 0;
  std::map<int, Jet> by_degree;
  for (const auto& c : components) {
    if (c.dim() != dim)
      throw StructuralError("component dimension " + std::to_string(c.dim()) + " does not match 2n = " +
                            std::to_string(dim));
    const int deg = c.lowest_degree();
    if (deg < 0) continue;
    if (homogeneous_part(c, deg) != c)
      throw HypothesisError("H2", "component is not homogeneous");
    max_deg = std::max(max_deg, deg);
    by_degree.try_emplace(deg, Jet(dim, c.order()));
    auto& slot = by_degree[deg];
    if (slot.order() != c.order()) slot = slot.with_order(std::max(slot.order(), c.order()));
    slot += c.with_order(slot.order());
  }
  std::erase_if(by_degree, [](const auto& kv) { return kv.second.is_zero(); });
  if (by_degree.empty()) throw HypothesisError("H2", "all components vanish; no isolated critical point");
  if (order < 0) order = max_deg;
  if (order < max_deg) throw DomainError("declared order is below the largest component degree");

  SymbolModel s;
  s.n_ = n;
  s.ec_ = ec;
  s.p1_ = p1;
  s.order_ = order;
  for (auto& [deg, c] : by_degree) s.components_.emplace(deg, c.with_order(order));
  s.k_ = s.components_.begin()->first;
  if (s.k_ <= 2)
    throw HypothesisError("H2", "first non-vanishing component has degree " + std::to_string(s.k_) +
                                    "; a totally degenerate critical point needs k > 2");

  // Definiteness of p_k on the sphere.
  const Jet& pk = s.leading();
  double vmax = 0.0, vmin_abs = std::numeric_limits<double>::infinity();
  std::vector<double> at_min, at_pos, at_neg;
  bool pos = false, neg = false;
  for (const auto& th : sphere::sample(n)) {
    const double v = pk.eval(th);
    vmax = std::max(vmax, std::abs(v));
    if (std::abs(v) < vmin_abs) {
      vmin_abs = std::abs(v);
      at_min = th;
    }
    if (v > 0 && !pos) pos = true, at_pos = th;
    if (v < 0 && !neg) neg = true, at_neg = th;
  }
  if (pos && neg) {
    throw HypothesisError("H4",
                          "leading component p_" + std::to_string(s.k_) +
                              " changes sign on the unit sphere (positive at " + format_direction(at_pos) +
                              ", negative at " + format_direction(at_neg) + "); " +
                              "the critical point is not a local extremum",
                          at_min);
  }
  if (vmin_abs < kDefinitenessMargin * vmax) {
    throw HypothesisError("H4",
                          "leading component p_" + std::to_string(s.k_) + " nearly vanishes at " +
                              format_direction(at_min) + "; the critical point is not a strict extremum",
                          at_min);
  }
  s.extremum_ = pos ? Extremum::Minimum : Extremum::Maximum;
  return s;
}

// Same symbol with Taylor data declared through a higher order.
inline SymbolModel with_order(const SymbolModel& s, int order) {
  std::vector<Jet> comps;
  for (const auto& [deg, c] : s.components()) comps.push_back(c);
  return make_symbol(s.n(), s.critical_energy(), std::move(comps), s.p1(), std::max(order, s.order()));
}

// sign * (|z|^2)^m in 2n variables.
inline Jet oscillator_power(int n, int m, double sign, int order = -1) {
  const int dim = 2 * n;
  if (order < 0) order = 2 * m;
  Jet q(dim, order);
  for (int i = 0; i < dim; ++i) {
    MultiIndex a{};
    a[i] = 2;
    q.set(a, 1.0);
  }
  Jet r = Jet::constant(dim, order, 1.0);
  for (int i = 0; i < m; ++i) r = r * q;
  return sign * r;
}

// I_k = int over S^{2n-1} of |p_k|^(-2n/k). Trapezoid rule on the circle for
// n = 1; Gauss-Legendre in the Hopf angle times trapezoid in the two
// periodic angles for n = 2. The grid doubles until successive values agree
// to tol.
inline double sphere_integral(const SymbolModel& s, double tol) {
  if (!(tol > 0)) throw DomainError("sphere_integral: tol must be positive");
  const Jet& pk = s.leading();
  const double expo = -2.0 * s.n() / s.k();
  auto f = [&](std::span<const double> th) { return std::pow(std::abs(pk.eval(th)), expo); };
  const double two_pi = 2.0 * std::numbers::pi;
  double prev = std::numeric_limits<double>::quiet_NaN();
  if (s.n() == 1) {
    for (int m = 16; m <= (1 << 20); m *= 2) {
      double sum = 0.0;
      for (int i = 0; i < m; ++i) {
        const double th = two_pi * i / m;
        const double z[2] = {std::cos(th), std::sin(th)};
        sum += f(z);
      }
      const double val = sum * two_pi / m;
      if (std::abs(val - prev) <= tol) return val;
      prev = val;
    }
  } else {
    for (int m = 8; m <= 256; m *= 2) {
      quad::GaussLegendre gl(m / 2 + 2);
      double sum = 0.0;
      for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
        const double eta = 0.25 * std::numbers::pi * (gl.nodes[q] + 1.0);
        const double ce = std::cos(eta), se = std::sin(eta);
        const double w = gl.weights[q] * 0.25 * std::numbers::pi * ce * se;
        double inner = 0.0;
        for (int i = 0; i < m; ++i) {
          const double a = two_pi * i / m;
          for (int j = 0; j < m; ++j) {
            const double b = two_pi * j / m;
            const double z[4] = {ce * std::cos(a), ce * std::sin(a), se * std::cos(b), se * std::sin(b)};
            inner += f(z);
          }
        }
        sum += w * inner * (two_pi / m) * (two_pi / m);
      }
      if (std::abs(sum - prev) <= tol) return sum;
      prev = sum;
    }
  }
  throw ConvergenceError("sphere_integral did not reach tolerance at the finest grid");
}

// H_{p0} = (d_xi p0, -d_x p0), each component of degree <= order - 1.
inline VectorJet hamiltonian_field(const SymbolModel& s, int order) {
  if (order > s.order())
    throw DomainError("hamiltonian_field: order " + std::to_string(order) + " exceeds symbol data (order " +
                      std::to_string(s.order()) + ")");
  const Jet p0 = s.principal(order);
  const int n = s.n();
  std::vector<Jet> c(2 * n, Jet(2 * n, order));
  for (int i = 0; i < n; ++i) {
    c[i] = jet_diff(p0, n + i);
    c[n + i] = -jet_diff(p0, i);
  }
  return VectorJet(std::move(c));
}

}  // namespace degentrace
