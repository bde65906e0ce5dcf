#pragma once

// Both sides of the trace asymptotics at the critical level: the spectral
// sum gamma(E_c, h) = sum phi((lambda_j - E_c)/h) over an eigenvalue window,
// and the predicted leading term h^{2n/k - n} Lambda_0, together with the
// log-log power-law fit.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <functional>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "degentrace/errors.hpp"
#include "degentrace/quadrature.hpp"
#include "degentrace/spectrum.hpp"
#include "degentrace/symbols.hpp"

namespace degentrace {

enum class TestKind { Fejer, SmoothBump, Custom };

inline const char* to_string(TestKind k) {
  switch (k) {
    case TestKind::Fejer:
      return "fejer";
    case TestKind::SmoothBump:
      return "bump";
    default:
      return "custom";
  }
}

namespace detail {

// phi for the bump phi_hat(tau) = exp(-1/(1-(tau/T)^2)), tabulated on
// [0, t_max] with cubic Hermite interpolation; phi is taken as 0 beyond
// t_max, where it has dropped below the tolerance.
class BumpTable {
 public:
  BumpTable(double T, double tol) : T_(T), tol_(tol), step_(0.05 / T) {
    double peak = 0.0;
    int quiet = 0;
    for (int i = 0;; ++i) {
      const double t = i * step_;
      const auto [f, df] = evaluate(t);
      f_.push_back(f);
      df_.push_back(df);
      peak = std::max(peak, std::abs(f));
      quiet = (std::abs(f) < tol && std::abs(df) * step_ < tol) ? quiet + 1 : 0;
      if (quiet > static_cast<int>(4.0 * std::numbers::pi / (T * step_))) break;
      if (t > 1e4 / T) throw ConvergenceError("bump test function does not decay below tolerance");
    }
    t_max_ = (f_.size() - 1) * step_;
  }

  double t_max() const { return t_max_; }

  double phi(double t) const {
    t = std::abs(t);
    if (t >= t_max_) return 0.0;
    const auto i = static_cast<std::size_t>(t / step_);
    const double s = t / step_ - i;
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
    return h00 * f_[i] + h10 * step_ * df_[i] + h01 * f_[i + 1] + h11 * step_ * df_[i + 1];
  }

  double phi_hat(double tau) const {
    const double x = tau / T_;
    if (std::abs(x) >= 1.0) return 0.0;
    return std::exp(-1.0 / (1.0 - x * x));
  }

  // (phi, phi') at t by the trapezoid rule on (1/pi) int_0^T phi_hat cos(t tau),
  // doubling the node count until both settle to tol.
  std::pair<double, double> evaluate(double t) const {
    double prev_f = std::numeric_limits<double>::quiet_NaN(), prev_d = prev_f;
    for (int n = 32; n <= (1 << 22); n *= 2) {
      const double d = T_ / n;
      double f = 0.0, df = 0.0;
      for (int j = 1; j < n; ++j) {
        const double tau = j * d;
        const double w = phi_hat(tau);
        f += w * std::cos(t * tau);
        df -= w * tau * std::sin(t * tau);
      }
      f = (f + 0.5 * phi_hat(0.0)) * d / std::numbers::pi;
      df = df * d / std::numbers::pi;
      if (std::abs(f - prev_f) <= 0.1 * tol_ && std::abs(df - prev_d) <= 0.1 * tol_ * T_) return {f, df};
      prev_f = f;
      prev_d = df;
    }
    throw ConvergenceError("bump test function quadrature did not converge at t=" + std::to_string(t));
  }

 private:
  double T_;
  double tol_;
  double step_;
  double t_max_ = 0.0;
  std::vector<double> f_, df_;
};

}  // namespace detail

// phi(t) = sum_a w_a f_a(t - s_a) where each f_a is an even Fejer or bump
// profile, or a user callable. Shifts, reflections and linear combinations
// stay inside this representation.
class TestFunction {
 public:
  struct Atom {
    TestKind kind = TestKind::Fejer;
    double T = 1.0;
    double weight = 1.0;
    double shift = 0.0;
    std::shared_ptr<const detail::BumpTable> bump;
    std::function<double(double)> phi;              // Custom only
    std::function<std::complex<double>(double)> phi_hat;  // Custom only
    double tail_radius = 0.0;                       // Custom: phi negligible beyond
  };

  static TestFunction fejer(double T) {
    if (!(T > 0)) throw DomainError("Fejer T must be positive");
    TestFunction f;
    Atom a;
    a.T = T;
    f.atoms_.push_back(std::move(a));
    return f;
  }
  static TestFunction bump(double T, double quad_tol = 1e-12) {
    if (!(T > 0)) throw DomainError("bump T must be positive");
    TestFunction f;
    Atom a;
    a.kind = TestKind::SmoothBump;
    a.T = T;
    a.bump = std::make_shared<detail::BumpTable>(T, quad_tol);
    f.atoms_.push_back(std::move(a));
    return f;
  }
  // Test-only input: phi with explicit transform and a radius beyond which
  // phi is below the quadrature tolerance.
  static TestFunction custom(std::function<double(double)> phi, std::function<std::complex<double>(double)> phi_hat,
                             double T, double tail_radius) {
    TestFunction f;
    Atom a;
    a.kind = TestKind::Custom;
    a.T = T;
    a.phi = std::move(phi);
    a.phi_hat = std::move(phi_hat);
    a.tail_radius = tail_radius;
    f.atoms_.push_back(std::move(a));
    return f;
  }

  const std::vector<Atom>& atoms() const { return atoms_; }
  TestKind kind() const { return atoms_.size() == 1 ? atoms_[0].kind : TestKind::Custom; }
  // Support radius of phi_hat.
  double T() const {
    double t = 0.0;
    for (const auto& a : atoms_) t = std::max(t, a.T);
    return t;
  }

  // t -> phi(t - s).
  TestFunction shifted(double s) const {
    TestFunction f = *this;
    for (auto& a : f.atoms_) a.shift += s;
    return f;
  }
  // t -> phi(-t). Atoms are even, so only shifts flip; custom atoms are wrapped.
  TestFunction reflected() const {
    TestFunction f = *this;
    for (auto& a : f.atoms_) {
      a.shift = -a.shift;
      if (a.kind == TestKind::Custom) {
        auto p = a.phi;
        auto ph = a.phi_hat;
        a.phi = [p](double t) { return p(-t); };
        a.phi_hat = [ph](double tau) { return ph(-tau); };
      }
    }
    return f;
  }
  friend TestFunction operator*(double c, TestFunction f) {
    for (auto& a : f.atoms_) a.weight *= c;
    return f;
  }
  friend TestFunction operator+(TestFunction f, const TestFunction& g) {
    f.atoms_.insert(f.atoms_.end(), g.atoms_.begin(), g.atoms_.end());
    return f;
  }

  static double atom_profile(const Atom& a, double u) {
    switch (a.kind) {
      case TestKind::Fejer: {
        const double x = 0.5 * a.T * u;
        const double s = x == 0.0 ? 1.0 : std::sin(x) / x;
        return a.T / (2.0 * std::numbers::pi) * s * s;
      }
      case TestKind::SmoothBump:
        return a.bump->phi(u);
      default:
        return a.phi(u);
    }
  }

  double operator()(double t) const { return phi(t); }
  double phi(double t) const {
    double s = 0.0;
    for (const auto& a : atoms_) s += a.weight * atom_profile(a, t - a.shift);
    return s;
  }
  std::complex<double> phi_hat(double tau) const {
    std::complex<double> s = 0.0;
    for (const auto& a : atoms_) {
      std::complex<double> base;
      switch (a.kind) {
        case TestKind::Fejer:
          base = std::max(1.0 - std::abs(tau) / a.T, 0.0);
          break;
        case TestKind::SmoothBump:
          base = a.bump->phi_hat(tau);
          break;
        default:
          base = a.phi_hat(tau);
      }
      s += a.weight * std::polar(1.0, -tau * a.shift) * base;
    }
    return s;
  }

 private:
  std::vector<Atom> atoms_;
};

inline TestFunction fejer_phi(double T) { return TestFunction::fejer(T); }
inline TestFunction bump_phi(double T, double quad_tol = 1e-12) { return TestFunction::bump(T, quad_tol); }

// ---------------------------------------------------------------------------
// Spectral sum.

inline double gamma_sum(const SpectrumResult& spec, double ec, double h, const TestFunction& tf, double eps) {
  if (!spec.converged) throw DomainError("gamma_sum needs a converged spectrum");
  if (!(h > 0)) throw DomainError("h must be positive");
  if (ec - eps < spec.window.lo - 1e-15 || ec + eps > spec.window.hi + 1e-15)
    throw DomainError("gamma_sum window exceeds the resolved spectral window");
  // Compensated summation keeps the result independent of the level count.
  double sum = 0.0, comp = 0.0;
  for (std::size_t i = 0; i < spec.eigenvalues.size(); ++i) {
    const double lam = spec.eigenvalues[i];
    if (std::abs(lam - ec) > eps) continue;
    const double y = static_cast<double>(spec.multiplicities[i]) * tf((lam - ec) / h) - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum;
}

// ---------------------------------------------------------------------------
// Singular time pairing.

enum class HalfLine { Plus, Minus };  // t_+ for a minimum, t_- for a maximum

inline const char* to_string(HalfLine s) { return s == HalfLine::Plus ? "t+" : "t-"; }

namespace detail {

// int_L^inf f(sigma t + p) t^alpha dt for one Fejer atom f(u) =
// (1 - cos T u) / (pi T u^2). The non-oscillatory part is mapped to a finite
// interval; the oscillatory part is rotated onto t = L + i sigma y / T.
inline double fejer_tail(double T, double sigma, double p, double alpha, double L, double tol) {
  quad::Options opt;
  opt.abs_tol = 0.25 * tol;
  opt.rel_tol = 1e-14;
  auto smooth = [&](double x) {
    if (x <= 0.0) return 0.0;
    const double t = L / x;
    const double u = sigma * t + p;
    return std::pow(t, alpha) / (u * u) * (L / (x * x));
  };
  const double a = quad::integrate(smooth, 0.0, 1.0, opt).value;
  const std::complex<double> i(0.0, 1.0);
  auto rotated = [&](double y) {
    const std::complex<double> t(L, sigma * y / T);
    const std::complex<double> u = sigma * t + p;
    return std::pow(t, alpha) / (u * u) * std::exp(-y);
  };
  const auto b = quad::integrate_half_line(rotated, opt).value;
  // e^{i T (sigma L + p)} times dt = i sigma dy / T.
  const std::complex<double> osc = std::exp(i * T * (sigma * L + p)) * (i * sigma / T) * b;
  return (a - osc.real()) / (std::numbers::pi * T);
}

}  // namespace detail

// int_0^inf phi(+-t + p1) t^alpha dt, alpha in (-1, 0]. The head [0, L] uses
// the substitution t = v^{1/(1+alpha)}; the tail is analytic for Fejer atoms
// and truncated where the profile is below tol otherwise.
inline double pairing(const TestFunction& tf, double p1, double alpha, HalfLine side, double tol = 1e-12) {
  if (!(alpha > -1.0) || alpha > 0.0) throw DomainError("pairing exponent must lie in (-1, 0]");
  if (!(tol > 0)) throw DomainError("pairing tol must be positive");
  const double sigma = side == HalfLine::Plus ? 1.0 : -1.0;
  const auto& atoms = tf.atoms();
  double total = 0.0;
  const double each = tol / std::max<std::size_t>(1, atoms.size());
  for (const auto& atom : atoms) {
    const double p = p1 - atom.shift;
    auto f = [&](double t) { return TestFunction::atom_profile(atom, sigma * t + p); };
    double L;
    switch (atom.kind) {
      case TestKind::Fejer:
        L = std::abs(p) + 40.0 / atom.T;
        break;
      case TestKind::SmoothBump:
        L = std::abs(p) + atom.bump->t_max();
        break;
      default:
        L = std::abs(p) + atom.tail_radius;
    }
    // Breakpoints every half period of the profile's oscillation.
    const double period = std::numbers::pi / atom.T;
    const double p_alpha = 1.0 + alpha;
    std::vector<double> breaks{0.0};
    for (double t = period; t < L; t += period) breaks.push_back(std::pow(t, p_alpha));
    breaks.push_back(std::pow(L, p_alpha));
    quad::Options opt;
    opt.abs_tol = 0.5 * each;
    opt.rel_tol = 1e-14;
    const double head =
        quad::integrate_pieces([&](double v) { return f(std::pow(v, 1.0 / p_alpha)); }, breaks, opt).value / p_alpha;
    const double tail = atom.kind == TestKind::Fejer ? detail::fejer_tail(atom.T, sigma, p, alpha, L, 0.5 * each) : 0.0;
    total += atom.weight * (head + tail);
  }
  return total;
}

struct Prediction {
  double lambda0 = 0.0;
  double exponent = 0.0;
  double pairing = 0.0;
  double sphere_integral = 0.0;
  HalfLine side = HalfLine::Plus;
};

// Lambda_0 = (1/k) pairing (2 pi)^{-n} I_k with exponent 2n/k - n.
inline Prediction lambda0_predict(const SymbolModel& s, const TestFunction& tf, double tol = 1e-12) {
  Prediction pr;
  const int n = s.n(), k = s.k();
  pr.exponent = 2.0 * n / k - n;
  pr.side = s.extremum() == Extremum::Minimum ? HalfLine::Plus : HalfLine::Minus;
  pr.pairing = pairing(tf, s.p1(), static_cast<double>(2 * n - k) / k, pr.side, tol);
  pr.sphere_integral = sphere_integral(s, std::max(tol, 1e-13));
  pr.lambda0 = pr.pairing * pr.sphere_integral / (k * std::pow(2.0 * std::numbers::pi, n));
  return pr;
}

// ---------------------------------------------------------------------------
// Power-law fit.

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // root-mean-square residual of log gamma
  int used = 0;
  std::vector<double> excluded_h;  // points with gamma <= 0
};

inline FitResult fit_exponent(const std::vector<std::pair<double, double>>& pairs) {
  FitResult r;
  std::vector<double> x, y;
  for (const auto& [h, g] : pairs) {
    if (!(h > 0)) throw DomainError("fit_exponent: h must be positive");
    if (!(g > 0)) {
      r.excluded_h.push_back(h);
      continue;
    }
    x.push_back(std::log(h));
    y.push_back(std::log(g));
  }
  r.used = static_cast<int>(x.size());
  if (r.used < 2) throw DomainError("fit_exponent needs at least two points with positive gamma");
  const double n = r.used;
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw DomainError("fit_exponent: all h values coincide");
  r.slope = sxy / sxx;
  r.intercept = my - r.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (r.intercept + r.slope * x[i]);
    ss += e * e;
  }
  r.residual = r.used == 2 ? 0.0 : std::sqrt(ss / n);
  return r;
}

// ---------------------------------------------------------------------------
// Trace runs.

// Largest eps for which no periodic orbit of period <= T lies in the energy
// window, or nullopt when no bound is available for the model.
inline std::optional<double> period_protection_bound(const OperatorModel& model, double T) {
  if (model.is_osc_power()) {
    const int m = std::get<OscPower>(model.kind).m;
    return std::pow(std::numbers::pi / (m * T), static_cast<double>(m) / (m - 1));
  }
  const auto& s = std::get<SymbolModel>(model.kind);
  if (s.n() != 1 || s.components().size() != 1) return std::nullopt;
  // Homogeneous degree-k Hamiltonian in one degree of freedom:
  // period(E) = (I_k / k) E^{2/k - 1}.
  const int k = s.k();
  const double ik = sphere_integral(s, 1e-12);
  return std::pow(ik / (k * T), static_cast<double>(k) / (k - 2));
}

inline int worker_count() {
  if (const char* env = std::getenv("DEGENTRACE_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

struct TraceRow {
  double h = 0.0;
  double gamma = 0.0;
  double prediction = 0.0;  // h^exponent Lambda_0
  double ratio = 0.0;
  int basis_N = 0;
  bool converged = false;
  long long count = 0;
  std::string error;
};

struct TraceRun {
  double eps = 0.0;
  Prediction prediction;
  std::vector<TraceRow> rows;  // h strictly decreasing
  std::optional<FitResult> fit;

  const TraceRow& smallest_h() const { return rows.back(); }
};

struct TraceOptions {
  int threads = 0;  // 0: DEGENTRACE_THREADS or hardware concurrency
  double tol = 1e-12;
  bool check_period = true;
  SpectrumOptions spectrum;
};

inline std::vector<double> log_grid(double start, double stop, int points) {
  if (points < 1 || !(start > 0) || !(stop > 0)) throw DomainError("log grid needs positive endpoints and points >= 1");
  std::vector<double> g;
  if (points == 1) return {start};
  const double ratio = stop / start;
  for (int i = 0; i < points; ++i) g.push_back(start * std::pow(ratio, static_cast<double>(i) / (points - 1)));
  g.back() = stop;
  return g;
}

template <class F>
void parallel_for(std::size_t count, int threads, F&& body) {
  threads = std::max(1, std::min<int>(threads, static_cast<int>(count)));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < threads; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) body(i);
    });
  for (auto& t : pool) t.join();
}

inline TraceRun run_trace(const OperatorModel& model, const TestFunction& tf, double eps,
                          const std::vector<double>& h_grid, const TraceOptions& opt = {}) {
  if (!(eps > 0)) throw DomainError("eps must be positive");
  if (h_grid.empty()) throw DomainError("h grid is empty");
  for (std::size_t i = 1; i < h_grid.size(); ++i)
    if (!(h_grid[i] < h_grid[i - 1])) throw DomainError("h grid must be strictly decreasing");
  if (opt.check_period) {
    const auto bound = period_protection_bound(model, tf.T());
    if (!bound)
      throw ConfigError("period protection: no orbit-period bound is available for this model; "
                        "disable the check explicitly to run it");
    if (eps >= *bound)
      throw ConfigError("period protection: eps=" + std::to_string(eps) + " must stay below " +
                        std::to_string(*bound) + " so that no periodic orbit of period <= T=" +
                        std::to_string(tf.T()) + " lies in the window");
  }
  TraceRun run;
  run.eps = eps;
  run.prediction = lambda0_predict(model.symbol(), tf, opt.tol);
  const double ec = model.critical_energy();
  run.rows.resize(h_grid.size());
  parallel_for(h_grid.size(), opt.threads > 0 ? opt.threads : worker_count(), [&](std::size_t i) {
    TraceRow& row = run.rows[i];
    row.h = h_grid[i];
    row.prediction = std::pow(row.h, run.prediction.exponent) * run.prediction.lambda0;
    try {
      const auto spec = spectrum(model, row.h, {ec - eps, ec + eps}, opt.spectrum);
      row.basis_N = spec.basis_N;
      row.converged = spec.converged;
      row.count = spec.count();
      row.gamma = gamma_sum(spec, ec, row.h, tf, eps);
      row.ratio = row.gamma / row.prediction;
    } catch (const ConvergenceError& e) {
      row.converged = false;
      row.error = e.what();
    }
  });
  std::vector<std::pair<double, double>> pts;
  for (const auto& row : run.rows)
    if (row.converged) pts.emplace_back(row.h, row.gamma);
  if (pts.size() >= 2) run.fit = fit_exponent(pts);
  return run;
}

}  // namespace degentrace
