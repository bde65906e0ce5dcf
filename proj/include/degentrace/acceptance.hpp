#pragma once

// The acceptance suite: one check per criterion, each timed against its
// runtime budget.

#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "degentrace/flow.hpp"
#include "degentrace/oscint.hpp"
#include "degentrace/runner.hpp"
#include "degentrace/spectrum.hpp"
#include "degentrace/symbols.hpp"
#include "degentrace/trace.hpp"

namespace degentrace::acceptance {

struct Outcome {
  int id = 0;
  std::string name;
  bool passed = false;
  double seconds = 0.0;
  double budget = 0.0;
  std::string detail;
};

namespace detail {

inline std::string num(double v, int digits = 6) {
  std::ostringstream os;
  os.precision(digits);
  os << v;
  return os.str();
}

inline double rel(double a, double b) { return std::abs(a / b - 1.0); }

inline TraceRun closed_form_run(int n, int m, double sign, double shift, const TestFunction& tf, double eps = 0.5) {
  return run_trace(osc_power_model(n, m, sign, shift), tf, eps, log_grid(1e-2, 1e-5, 9));
}

inline double gamma_at(const OperatorModel& model, double h, const TestFunction& tf, double eps) {
  const double ec = model.critical_energy();
  return gamma_sum(spectrum(model, h, {ec - eps, ec + eps}), ec, h, tf, eps);
}

// Fejer T = 1: int_0^inf phi(t) t^{-1/2} dt = 2 sqrt(2) / (3 sqrt(pi)).
inline double fejer_half_moment() { return 2.0 * std::numbers::sqrt2 / (3.0 * std::sqrt(std::numbers::pi)); }

}  // namespace detail

inline Outcome exponent_k4() {
  Outcome o;
  const auto run = detail::closed_form_run(1, 2, 1.0, 0.0, fejer_phi(1.0));
  o.passed = run.fit && std::abs(run.fit->slope + 0.5) <= 0.02;
  o.detail = "slope=" + detail::num(run.fit ? run.fit->slope : NAN) + " expected=-0.5 tol=0.02";
  return o;
}

inline Outcome prefactor_k4() {
  Outcome o;
  const auto run = detail::closed_form_run(1, 2, 1.0, 0.0, fejer_phi(1.0));
  const double ratio = run.smallest_h().ratio;
  const double oracle = 0.25 * detail::fejer_half_moment();
  const double oracle_dev = detail::rel(run.prediction.lambda0, oracle);
  o.passed = std::abs(ratio - 1.0) <= 0.02 && oracle_dev <= 0.005;
  o.detail = "ratio(h=1e-5)=" + detail::num(ratio, 8) + " lambda0=" + detail::num(run.prediction.lambda0, 10) +
             " continuum_oracle=" + detail::num(oracle, 10) + " oracle_dev=" + detail::num(oracle_dev, 3);
  return o;
}

inline Outcome exponent_prefactor_k6() {
  Outcome o;
  const auto tf = fejer_phi(1.0);
  const auto run = detail::closed_form_run(1, 3, 1.0, 0.0, tf);
  const double direct = pairing(tf, 0.0, -2.0 / 3.0, HalfLine::Plus) / 6.0;
  const double ratio = run.smallest_h().ratio;
  o.passed = run.fit && std::abs(run.fit->slope + 2.0 / 3.0) <= 0.02 && std::abs(ratio - 1.0) <= 0.03 &&
             detail::rel(run.prediction.lambda0, direct) <= 1e-10;
  o.detail = "slope=" + detail::num(run.fit ? run.fit->slope : NAN) + " ratio(h=1e-5)=" + detail::num(ratio, 8) +
             " lambda0=" + detail::num(run.prediction.lambda0, 10);
  return o;
}

inline Outcome two_degrees_of_freedom() {
  Outcome o;
  const auto tf = fejer_phi(1.0);
  const auto run = detail::closed_form_run(2, 2, 1.0, 0.0, tf);
  const double expected = pairing(tf, 0.0, 0.0, HalfLine::Plus) / 8.0;
  const double ratio = run.smallest_h().ratio;
  o.passed = run.fit && std::abs(run.fit->slope + 1.0) <= 0.02 && std::abs(ratio - 1.0) <= 0.03 &&
             detail::rel(run.prediction.lambda0, expected) <= 1e-8;
  o.detail = "slope=" + detail::num(run.fit ? run.fit->slope : NAN) + " ratio(h=1e-5)=" + detail::num(ratio, 8) +
             " lambda0=" + detail::num(run.prediction.lambda0, 10) + " (1/8)int phi=" + detail::num(expected, 10);
  return o;
}

inline Outcome maximum_case() {
  Outcome o;
  const auto even = fejer_phi(1.0);
  const auto run = detail::closed_form_run(1, 2, -1.0, 0.0, even);
  const bool even_ok = run.prediction.side == HalfLine::Minus && std::abs(run.smallest_h().ratio - 1.0) <= 0.02;

  const auto asym = even.shifted(0.4);
  const auto model = osc_power_model(1, 2, -1.0);
  const double h = 1e-5;
  const double g = detail::gamma_at(model, h, asym, 0.5);
  const double scale = std::pow(h, -0.5) * 0.25;
  const double with_minus = scale * pairing(asym, 0.0, -0.5, HalfLine::Minus);
  const double with_plus = scale * pairing(asym, 0.0, -0.5, HalfLine::Plus);
  const double r_minus = g / with_minus, r_plus = g / with_plus;
  o.passed = even_ok && std::abs(r_minus - 1.0) <= 0.02 && std::abs(r_plus - 1.0) > 0.05;
  o.detail = "ratio_even=" + detail::num(run.smallest_h().ratio, 8) + " shifted: ratio(t-)=" + detail::num(r_minus, 8) +
             " ratio(t+)=" + detail::num(r_plus, 8);
  return o;
}

inline Outcome subprincipal_shift() {
  Outcome o;
  const auto tf = fejer_phi(1.0);
  const auto model = osc_power_model(1, 2, 1.0, 0.3);
  const double h = 1e-4;
  const double g = detail::gamma_at(model, h, tf, 0.5);
  const double scale = std::pow(h, -0.5) * 0.25;
  const double predicted = lambda0_predict(model.symbol(), tf).lambda0 * std::pow(h, -0.5);
  const double shifted = scale * pairing(tf, 0.3, -0.5, HalfLine::Plus);
  const double dropped = scale * pairing(tf, 0.0, -0.5, HalfLine::Plus);
  const double r_shift = g / shifted, r_drop = g / dropped;
  o.passed = std::abs(r_shift - 1.0) <= 0.02 && std::abs(g / predicted - 1.0) <= 0.02 && std::abs(r_drop - 1.0) > 0.05;
  o.detail = "h=1e-4 ratio(phi(t+0.3))=" + detail::num(r_shift, 8) + " ratio(shift dropped)=" + detail::num(r_drop, 8);
  return o;
}

inline Outcome quantized_quartic() {
  Outcome o;
  Jet p4(2, 4);
  p4.set({4, 0}, 1.0);
  p4.set({0, 4}, 1.0);
  const auto model = poly_symbol_model(make_symbol(1, 0.0, {p4}, 0.0));
  const auto run = run_trace(model, fejer_phi(1.0), 0.5, log_grid(1e-1, 3e-3, 6));
  bool all_converged = true;
  std::string conv;
  for (const auto& r : run.rows) {
    all_converged = all_converged && r.converged;
    conv += " " + std::to_string(r.basis_N);
  }
  const double ratio = run.smallest_h().ratio;
  o.passed = all_converged && std::abs(ratio - 1.0) <= 0.05;
  o.detail = "ratio(h=3e-3)=" + detail::num(ratio, 8) + " I4=" + detail::num(run.prediction.sphere_integral, 14) +
             " converged=" + (all_converged ? "all" : "no") + " basis_N:" + conv;
  return o;
}

inline Outcome oscillatory_expansion() {
  Outcome o;
  const auto r = oscint_check(OscintSpec{});
  const double c3 = r.coefficients.coefficients[3].real();
  const double closed = 0.25 * std::numbers::pi;  // (1/4) int_{-inf}^0 b_hat, b_hat = 4 sin^2(tau/2)/tau^2
  double vanishing = 0.0;
  for (int j = 0; j < 3; ++j) vanishing = std::max(vanishing, std::abs(r.coefficients.coefficients[j]));
  o.passed = std::abs(r.fit.slope - r.expected_order) <= 0.1 && detail::rel(c3, closed) <= 0.01 && vanishing < 1e-12;
  o.detail = "remainder slope=" + detail::num(r.fit.slope) + " expected=" + detail::num(r.expected_order) +
             " c3=" + detail::num(c3, 12) + " closed=" + detail::num(closed, 12) + " max|c_j<3|=" + detail::num(vanishing, 3);
  return o;
}

inline Outcome flow_suite() {
  Outcome o;
  Jet p4(2, 4), p5(2, 5);
  p4.set({4, 0}, 1.0);
  p4.set({0, 4}, 1.0);
  p5.set({5, 0}, 0.3);
  p5.set({2, 3}, -0.2);
  std::vector<SymbolModel> models{make_symbol(1, 0.0, {oscillator_power(1, 2, 1.0)}, 0.0),
                                  make_symbol(1, 0.0, {p4, p5}, 0.0),
                                  make_symbol(1, 0.0, {oscillator_power(1, 3, -1.0)}, 0.0),
                                  make_symbol(2, 0.0, {oscillator_power(2, 2, 1.0)}, 0.0)};
  const std::vector<double> grid{-2.0, -1.0, 0.0, 1.0, 2.0};
  bool ok = true;
  double worst_hj = 0.0, worst_gen = 0.0, worst_first = 0.0, min_margin = 1e9;
  int pairs = 0;
  bool ladder = true, sk_exact = true, jac_exact = true;
  for (const auto& s0 : models) {
    const int order = s0.n() == 1 ? s0.k() + 2 : s0.k() + 1;
    const auto fc = flow_check(s0, order, grid, 1.0);
    ladder = ladder && fc.degeneracy_ok;
    worst_first = std::max(worst_first, fc.first_jet_residual);
    worst_hj = std::max(worst_hj, fc.hj_residual);
    worst_gen = std::max(worst_gen, fc.generating_residual);

    const SymbolModel s = with_order(s0, order);
    for (double t : grid) {
      const auto g = generating_jet(s, order, t);
      const Jet sk = homogeneous_part(g.S, s.k());
      const Jet expect = s.leading().with_order(order) * (-t);
      if (!(sk == expect)) sk_exact = false;
    }
    // Jet versus integrator on halving |z| <= 1e-2. Pairs whose error sits at
    // the rounding floor of the integrator are not compared.
    for (int m : {s.k() - 2, s.k() - 1}) {
      const auto series = flow_series(s, m);
      for (double t : {-2.0, 1.5}) {
        for (double phase : {0.7, 2.9}) {
          std::vector<double> dir(s.phase_dim());
          for (int i = 0; i < s.phase_dim(); ++i) dir[i] = std::cos(phase + 1.3 * i);
          double prev = 0.0;
          for (double r : {1e-2, 5e-3, 2.5e-3, 1.25e-3}) {
            std::vector<double> z;
            for (double d : dir) z.push_back(r * d);
            const auto exact = flow_numeric(s, z, t, 1e-15);
            const auto jet = series.at(t).eval(z);
            double err = 0.0;
            for (std::size_t i = 0; i < z.size(); ++i) err = std::max(err, std::abs(exact[i] - jet[i]));
            const bool resolved = err > 1e-11 * r;
            if (prev > 0.0 && resolved) {
              const double order_seen = std::log2(prev / err);
              ++pairs;
              if (order_seen < m + 1 - 0.05) ok = false;
              min_margin = std::min(min_margin, order_seen - (m + 1));
            }
            prev = resolved ? err : 0.0;
          }
        }
      }
    }
    // Normal-form Jacobian at t = 0 and t = 5 on a few directions.
    for (double th : {0.0, 0.3, std::numbers::pi / 4, 2.0}) {
      std::vector<double> theta(s.phase_dim(), 0.0);
      theta[0] = std::cos(th);
      theta[s.n()] = std::sin(th);
      const double a = normal_form_jacobian(s, 0.0, theta), b = normal_form_jacobian(s, 5.0, theta);
      const double expect = std::pow(std::abs(s.leading_at(theta)), 1.0 / s.k());
      if (a != b || std::abs(a - expect) > 1e-14) jac_exact = false;
    }
  }
  o.passed = ok && pairs > 0 && ladder && sk_exact && jac_exact && worst_first == 0.0 && worst_hj <= 1e-12 && worst_gen <= 1e-12;
  o.detail = std::string("ladder=") + (ladder ? "zero" : "NONZERO") + " first_jet_residual=" + detail::num(worst_first, 3) +
             " jet_vs_ode: pairs=" + std::to_string(pairs) +
             " min(observed_order-(m+1))=" + detail::num(min_margin, 4) + " hj_residual=" + detail::num(worst_hj, 3) +
             " generating_residual=" + detail::num(worst_gen, 3) + " S_k exact=" + (sk_exact ? "yes" : "no") +
             " jacobian t-independent=" + (jac_exact ? "yes" : "no");
  return o;
}

inline Outcome window_robustness() {
  Outcome o;
  const auto tf = fejer_phi(1.0);
  const auto model = osc_power_model(1, 2);
  const double g05 = detail::gamma_at(model, 1e-4, tf, 0.5);
  const double g10 = detail::gamma_at(model, 1e-4, tf, 1.0);
  const double dev = std::abs(g05 - g10) / g05;
  o.passed = dev <= 1e-3;
  o.detail = "gamma(0.5)=" + detail::num(g05, 12) + " gamma(1.0)=" + detail::num(g10, 12) + " rel_diff=" + detail::num(dev, 3);
  return o;
}

struct Criterion {
  int id;
  std::string name;
  double budget;
  std::function<Outcome()> check;
};

inline std::vector<Criterion> all_criteria() {
  return {{1, "exponent k=4 (OscPower(2), n=1)", 5.0, exponent_k4},
          {2, "prefactor k=4 (OscPower(2), n=1)", 5.0, prefactor_k4},
          {3, "exponent/prefactor k=6 (OscPower(3), n=1)", 5.0, exponent_prefactor_k6},
          {4, "n=2 (OscPower(2), multiplicities)", 10.0, two_degrees_of_freedom},
          {5, "maximum case (t- pairing)", 5.0, maximum_case},
          {6, "subprincipal shift c=0.3", 5.0, subprincipal_shift},
          {7, "quantized x^4+xi^4", 180.0, quantized_quartic},
          {8, "oscillatory-integral expansion (k=4, N=3)", 10.0, oscillatory_expansion},
          {9, "flow / Hamilton-Jacobi properties", 10.0, flow_suite},
          {10, "window robustness (h=1e-4)", 5.0, window_robustness}};
}

// Runs one criterion, converting exceptions and budget overruns into failures.
inline Outcome run_timed(const Criterion& c) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = c.check();
  } catch (const std::exception& e) {
    o.passed = false;
    o.detail = std::string("exception: ") + e.what();
  }
  o.id = c.id;
  o.name = c.name;
  o.budget = c.budget;
  o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (o.seconds > o.budget) {
    o.passed = false;
    o.detail += " (runtime " + detail::num(o.seconds, 3) + " s exceeds budget " + detail::num(o.budget, 3) + " s)";
  }
  return o;
}

inline std::string format(const Outcome& o) {
  std::ostringstream os;
  os << (o.passed ? "PASS" : "FAIL") << " criterion " << o.id << ": " << o.name << " | " << o.detail << " | "
     << detail::num(o.seconds, 3) << " s";
  return os.str();
}

}  // namespace degentrace::acceptance
