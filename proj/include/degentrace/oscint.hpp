#pragma once

// Degenerate stationary phase for the normal-form phase +-chi0 chi1^k:
//
//   int_0^rmax int a(t, r) e^{+- i lambda t r^k} dt dr
//     ~ sum_j lambda^{-(j+1)/k} c_j(a)
//
// Amplitudes are r-polynomials a(t, r) = sum_l r^l b_l(t) whose t-profiles
// are samples on a uniform grid. Each profile is read as its piecewise-linear
// interpolant, whose Fourier transform is known exactly; all r-derivatives at
// r = 0 are then exact as well.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "degentrace/errors.hpp"
#include "degentrace/quadrature.hpp"

namespace degentrace {

using cplx = std::complex<double>;

enum class PhaseSign { Plus, Minus };

inline const char* to_string(PhaseSign s) { return s == PhaseSign::Plus ? "plus" : "minus"; }

// Uniform samples f_i = b(t0 + i dt), i = 0..size-1.
struct SampledProfile {
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<double> values;

  double t(std::size_t i) const { return t0 + dt * static_cast<double>(i); }

  // Piecewise-linear interpolant, zero outside the grid.
  double operator()(double t) const {
    if (values.empty()) return 0.0;
    const double x = (t - t0) / dt;
    if (x < 0.0 || x > static_cast<double>(values.size() - 1)) return 0.0;
    const auto i = std::min(static_cast<std::size_t>(x), values.size() - 2);
    const double w = x - static_cast<double>(i);
    return (1.0 - w) * values[i] + w * values[i + 1];
  }

  static SampledProfile sample(const std::function<double(double)>& f, double a, double b, std::size_t intervals) {
    SampledProfile p;
    p.t0 = a;
    p.dt = (b - a) / static_cast<double>(intervals);
    for (std::size_t i = 0; i <= intervals; ++i) p.values.push_back(f(p.t(i)));
    return p;
  }
};

struct OscTerm {
  int l = 0;  // power of r
  SampledProfile b;
};

struct OscAmplitude {
  int k = 4;
  double r_max = 1.0;
  std::vector<OscTerm> terms;

  int min_exponent() const {
    int m = -1;
    for (const auto& t : terms)
      if (m < 0 || t.l < m) m = t.l;
    return m;
  }
  const OscTerm* term(int l) const {
    for (const auto& t : terms)
      if (t.l == l) return &t;
    return nullptr;
  }
  double value(double t, double r) const {
    double s = 0.0;
    for (const auto& term : terms) s += std::pow(r, term.l) * term.b(t);
    return s;
  }
};

inline void validate(const OscAmplitude& a) {
  if (a.k <= 2) throw DomainError("oscillatory amplitude needs k > 2");
  if (!(a.r_max > 0)) throw DomainError("r_max must be positive");
  std::set<int> seen;
  for (const auto& term : a.terms) {
    if (term.l < 0) throw DomainError("r-exponents must be non-negative");
    if (!seen.insert(term.l).second) throw DomainError("duplicate r-exponent " + std::to_string(term.l));
    if (!(term.b.dt > 0)) throw DomainError("profile grid spacing must be positive");
    if (term.b.values.size() < 3)
      throw ResolutionError("profile for r^" + std::to_string(term.l) + " has fewer than 3 samples");
    double peak = 0.0;
    for (double v : term.b.values) peak = std::max(peak, std::abs(v));
    const double edge = std::max(std::abs(term.b.values.front()), std::abs(term.b.values.back()));
    if (edge > 1e-10 * peak)
      throw ResolutionError("profile for r^" + std::to_string(term.l) +
                            " does not vanish at the ends of its grid; support is not contained in the grid");
  }
}

// Exact transforms b_hat_l(tau) = int b_l(t) e^{-i t tau} dt of the
// piecewise-linear profiles.
class PartialFourier {
 public:
  explicit PartialFourier(const OscAmplitude& a) : a_(a) {
    validate(a);
    for (const auto& term : a.terms) {
      Kinks kinks;
      const auto& v = term.b.values;
      for (std::size_t i = 0; i < v.size(); ++i) {
        const double prev = i ? v[i - 1] : 0.0;
        const double next = i + 1 < v.size() ? v[i + 1] : 0.0;
        const double s = (next - 2.0 * v[i] + prev) / term.b.dt;
        if (s != 0.0) {
          kinks.t.push_back(term.b.t(i));
          kinks.s.push_back(s);
        }
      }
      kinks_.push_back(std::move(kinks));
    }
  }

  const OscAmplitude& amplitude() const { return a_; }
  std::size_t size() const { return a_.terms.size(); }

  // b_hat(tau) = dt sum_i f_i e^{-i t_i tau} sinc^2(dt tau / 2).
  cplx operator()(std::size_t term, double tau) const {
    const auto& b = a_.terms.at(term).b;
    const double x = 0.5 * b.dt * tau;
    const double sinc = x == 0.0 ? 1.0 : std::sin(x) / x;
    // Rotate incrementally: e^{-i t_i tau} = e^{-i t_0 tau} (e^{-i dt tau})^i.
    cplx sum = 0.0;
    const cplx step = std::polar(1.0, -b.dt * tau);
    cplx w = std::polar(1.0, -b.t0 * tau);
    for (std::size_t i = 0; i < b.values.size(); ++i) {
      if (i % 64 == 0) w = std::polar(1.0, -b.t(i) * tau);
      sum += b.values[i] * w;
      w *= step;
    }
    return b.dt * sinc * sinc * sum;
  }

  // Same transform written as -(1/tau^2) sum_i s_i e^{-i t_i tau}, where s_i
  // are second differences over dt. Exact for tau != 0.
  struct Kinks {
    std::vector<double> t;
    std::vector<double> s;
  };
  const Kinks& kinks(std::size_t term) const { return kinks_.at(term); }

  std::vector<cplx> sample(std::size_t term, const std::vector<double>& taus) const {
    std::vector<cplx> out;
    for (double tau : taus) out.push_back((*this)(term, tau));
    return out;
  }

 private:
  OscAmplitude a_;
  std::vector<Kinks> kinks_;
};

inline PartialFourier partial_fourier(const OscAmplitude& a) { return PartialFourier(a); }

namespace detail {

// int_U^inf u^{beta-2} e^{i omega u} du. For omega != 0 the ray is rotated to
// u = U + i v / omega, v >= 0, where the integrand decays like e^{-v}. For
// omega = 0 the value is U^{beta-1} / (1 - beta), read as analytic
// continuation when beta > 1.
inline cplx power_exp_tail(double beta, double omega, double U, double tol) {
  if (omega == 0.0) {
    if (std::abs(beta - 1.0) < 1e-14) throw DomainError("c_j integral diverges logarithmically at beta = 1");
    return std::pow(U, beta - 1.0) / (1.0 - beta);
  }
  const cplx i(0.0, 1.0);
  auto f = [&](double v) { return std::pow(cplx(U, v / omega), beta - 2.0) * std::exp(-v); };
  quad::Options opt;
  opt.abs_tol = tol;
  opt.rel_tol = 1e-13;
  const auto r = quad::integrate_half_line(f, opt);
  return (i / omega) * std::exp(i * omega * U) * r.value;
}

}  // namespace detail

// int_0^inf u^beta b_hat(sigma u) du with sigma = -1 (plus-phase) or +1
// (minus-phase). Power substitution on [0, U], exact kink representation
// with contour rotation beyond U.
inline cplx half_line_moment(const PartialFourier& pf, std::size_t term, double beta, PhaseSign sign, double tol) {
  const double sigma = sign == PhaseSign::Plus ? -1.0 : 1.0;
  const auto& kinks = pf.kinks(term);
  double tmax = 0.0;
  for (double t : kinks.t) tmax = std::max(tmax, std::abs(t));
  const double U = std::numbers::pi / std::max(tmax, 1e-3);

  quad::Options opt;
  opt.abs_tol = 0.5 * tol;
  opt.rel_tol = 1e-13;
  auto head = quad::integrate_power_weight([&](double u) { return pf(term, sigma * u); }, beta, U, opt);

  // b_hat(sigma u) = -(1/u^2) sum_i s_i e^{-i t_i sigma u}.
  cplx tail = 0.0;
  const double each = 0.5 * tol / std::max<std::size_t>(1, kinks.t.size());
  for (std::size_t i = 0; i < kinks.t.size(); ++i)
    tail -= kinks.s[i] * detail::power_exp_tail(beta, -kinks.t[i] * sigma, U, each);
  return head.value + tail;
}

struct ExpansionResult {
  std::vector<cplx> coefficients;    // c_0 .. c_N
  std::vector<double> lambda_powers;  // -(j+1)/k
  int truncation = 0;

  cplx eval(double lambda) const {
    cplx s = 0.0;
    for (std::size_t j = 0; j < coefficients.size(); ++j) s += std::pow(lambda, lambda_powers[j]) * coefficients[j];
    return s;
  }
};

// c_j = (1/k) int_{-inf}^0 |tau|^{(j+1-k)/k} b_hat_j(tau) dtau for the
// plus-phase, over [0, inf) for the minus-phase. Zero when r^j is absent.
inline cplx cj_coefficient(const PartialFourier& pf, int j, PhaseSign sign = PhaseSign::Plus, double tol = 1e-12) {
  if (j < 0) throw DomainError("c_j index must be non-negative");
  const auto& a = pf.amplitude();
  for (std::size_t q = 0; q < a.terms.size(); ++q) {
    if (a.terms[q].l != j) continue;
    const double beta = static_cast<double>(j + 1 - a.k) / a.k;
    return half_line_moment(pf, q, beta, sign, tol) / static_cast<double>(a.k);
  }
  return 0.0;
}

inline cplx cj_coefficient(const OscAmplitude& a, int j, PhaseSign sign = PhaseSign::Plus, double tol = 1e-12) {
  return cj_coefficient(PartialFourier(a), j, sign, tol);
}

inline ExpansionResult expansion(const OscAmplitude& a, int N, PhaseSign sign, double tol = 1e-12) {
  if (N < 0) throw DomainError("expansion truncation must be non-negative");
  const PartialFourier pf(a);
  ExpansionResult r;
  r.truncation = N;
  for (int j = 0; j <= N; ++j) {
    r.coefficients.push_back(cj_coefficient(pf, j, sign, tol));
    r.lambda_powers.push_back(-static_cast<double>(j + 1) / a.k);
  }
  return r;
}

inline cplx expansion_eval(const OscAmplitude& a, double lambda, int N, PhaseSign sign, double tol = 1e-12) {
  if (!(lambda > 0)) throw DomainError("lambda must be positive");
  return expansion(a, N, sign, tol).eval(lambda);
}

// int_0^rmax sum_l r^l b_hat_l(-+ lambda r^k) dr by adaptive quadrature in r,
// with breakpoints every half oscillation of the fastest kink.
inline cplx brute_force(const OscAmplitude& a, double lambda, PhaseSign sign, double tol = 1e-13) {
  if (!(lambda > 0)) throw DomainError("lambda must be positive");
  if (a.terms.empty()) return 0.0;
  const PartialFourier pf(a);
  const double sigma = sign == PhaseSign::Plus ? -1.0 : 1.0;
  auto f = [&](double r) {
    const double tau = sigma * lambda * std::pow(r, a.k);
    cplx s = 0.0;
    for (std::size_t q = 0; q < a.terms.size(); ++q) s += std::pow(r, a.terms[q].l) * pf(q, tau);
    return s;
  };
  double tmax = 0.0;
  for (const auto& term : a.terms) tmax = std::max({tmax, std::abs(term.b.t0), std::abs(term.b.t(term.b.values.size() - 1))});
  const double tau_max = lambda * std::pow(a.r_max, a.k);
  const double period = std::numbers::pi / std::max(tmax, 1e-3);
  const auto pieces = static_cast<std::size_t>(std::min(4000.0, std::ceil(tau_max / period)));
  std::vector<double> breaks{0.0};
  for (std::size_t m = 1; m < pieces; ++m)
    breaks.push_back(std::pow(static_cast<double>(m) * tau_max / pieces / lambda, 1.0 / a.k));
  breaks.push_back(a.r_max);
  quad::Options opt;
  opt.abs_tol = tol;
  opt.rel_tol = 1e-13;
  opt.max_intervals = 200000;
  return quad::integrate_pieces(f, breaks, opt).value;
}

// The original two-dimensional integral
//   int_0^rmax int a(t, r) e^{-+ i sigma lambda t r^k} dt dr
// by composite Gauss-Legendre: one panel per grid cell in t (the profile is
// linear there) and uniform panels in r. Meant for small lambda.
inline cplx direct_2d(const OscAmplitude& a, double lambda, PhaseSign sign, int r_panels = 400, int nodes = 16) {
  validate(a);
  const double sigma = sign == PhaseSign::Plus ? 1.0 : -1.0;
  const quad::GaussLegendre gl(nodes);
  const double dr = a.r_max / r_panels;
  cplx total = 0.0;
  for (const auto& term : a.terms) {
    const auto& b = term.b;
    for (int pr = 0; pr < r_panels; ++pr) {
      for (int qr = 0; qr < nodes; ++qr) {
        const double r = dr * (pr + 0.5 * (gl.nodes[qr] + 1.0));
        const double omega = sigma * lambda * std::pow(r, a.k);
        cplx inner = 0.0;
        for (std::size_t c = 0; c + 1 < b.values.size(); ++c) {
          const double ta = b.t(c);
          for (int qt = 0; qt < nodes; ++qt) {
            const double w = 0.5 * (gl.nodes[qt] + 1.0);
            const double t = ta + b.dt * w;
            const double v = (1.0 - w) * b.values[c] + w * b.values[c + 1];
            inner += 0.5 * b.dt * gl.weights[qt] * v * std::polar(1.0, omega * t);
          }
        }
        total += 0.5 * dr * gl.weights[qr] * std::pow(r, term.l) * inner;
      }
    }
  }
  return total;
}

// Triangle profile max(1 - |t|/T, 0) sampled on [-W, W] with the kinks on
// grid nodes.
inline SampledProfile triangle_profile(double T, double W, std::size_t cells_per_unit = 40) {
  const auto intervals = static_cast<std::size_t>(std::ceil(2.0 * W * cells_per_unit));
  return SampledProfile::sample([T](double t) { return std::max(1.0 - std::abs(t) / T, 0.0); }, -W, W, intervals);
}

}  // namespace degentrace
