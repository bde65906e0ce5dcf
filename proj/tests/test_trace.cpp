#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "degentrace/errors.hpp"
#include "degentrace/trace.hpp"

using namespace degentrace;

namespace {

// int_0^inf Fejer_T(t) t^alpha dt = T^(-alpha) / pi * (-Gamma(alpha - 1) cos(pi (alpha - 1) / 2)).
double fejer_moment(double T, double alpha) {
  const double mu = alpha - 1.0;
  return std::pow(T, -alpha) / std::numbers::pi * (-std::tgamma(mu) * std::cos(std::numbers::pi * mu / 2));
}

OperatorModel quartic_model() {
  Jet p(2, 4);
  p.set({4, 0}, 1.0);
  p.set({0, 4}, 1.0);
  return poly_symbol_model(make_symbol(1, 0.0, {p}, 0.0));
}

}  // namespace

TEST(TestFunction, FejerPair) {
  const auto f = fejer_phi(2.0);
  EXPECT_NEAR(f(0.0), 1.0 / std::numbers::pi, 1e-15);
  EXPECT_NEAR(f.phi_hat(0.0).real(), 1.0, 1e-15);
  EXPECT_NEAR(f.phi_hat(1.0).real(), 0.5, 1e-15);
  EXPECT_EQ(f.phi_hat(2.5), std::complex<double>(0.0));
  EXPECT_NEAR(f(0.7), f(-0.7), 1e-16);
}

TEST(TestFunction, ShiftAndReflect) {
  const auto f = fejer_phi(1.0);
  const auto g = f.shifted(0.4);
  EXPECT_DOUBLE_EQ(g(1.1), f(0.7));
  const auto expect = std::polar(1.0, -0.4 * 0.3) * f.phi_hat(0.3);
  EXPECT_NEAR(std::abs(g.phi_hat(0.3) - expect), 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(g.reflected()(-1.1), g(1.1));
}

TEST(TestFunction, LinearCombination) {
  const auto f = 2.0 * fejer_phi(1.0) + fejer_phi(0.5).shifted(0.2);
  EXPECT_NEAR(f(0.3), 2.0 * fejer_phi(1.0)(0.3) + fejer_phi(0.5)(0.1), 1e-15);
  EXPECT_DOUBLE_EQ(f.T(), 1.0);
  EXPECT_EQ(f.kind(), TestKind::Custom);
}

TEST(TestFunction, BumpIsCompactInFrequencyAndDecays) {
  const auto b = bump_phi(1.0);
  EXPECT_EQ(b.phi_hat(1.0).real(), 0.0);
  EXPECT_EQ(b.phi_hat(-1.3).real(), 0.0);
  EXPECT_GT(b.phi_hat(0.0).real(), 0.0);
  EXPECT_NEAR(b(0.8), b(-0.8), 1e-15);
  // Faster than any power: t^4 phi(t) shrinks along the tail.
  const double a = std::pow(40.0, 4) * std::abs(b(40.0)), c = std::pow(160.0, 4) * std::abs(b(160.0));
  EXPECT_LT(c, a);
  // phi(0) = (1/2pi) int phi_hat.
  EXPECT_GT(b(0.0), 0.0);
}

TEST(Pairing, FejerClosedForms) {
  EXPECT_NEAR(pairing(fejer_phi(1.0), 0.0, -0.5, HalfLine::Plus), 0.531923040535245, 1e-12);
  EXPECT_NEAR(pairing(fejer_phi(1.0), 0.0, -0.5, HalfLine::Plus), 2.0 * std::numbers::sqrt2 / (3.0 * std::sqrt(std::numbers::pi)),
              1e-12);
  EXPECT_NEAR(pairing(fejer_phi(1.0), 0.0, -2.0 / 3.0, HalfLine::Plus), 0.664639300459484, 1e-12);
  for (double T : {0.5, 2.0})
    for (double alpha : {-0.5, -2.0 / 3.0, -0.2})
      EXPECT_NEAR(pairing(fejer_phi(T), 0.0, alpha, HalfLine::Plus), fejer_moment(T, alpha), 1e-11)
          << "T=" << T << " alpha=" << alpha;
  // alpha = 0: half the integral of phi, which is phi_hat(0) / 2.
  EXPECT_NEAR(pairing(fejer_phi(1.0), 0.0, 0.0, HalfLine::Plus), 0.5, 1e-12);
}

TEST(Pairing, ShiftedFejerPins) {
  EXPECT_NEAR(pairing(fejer_phi(1.0), 0.3, -0.5, HalfLine::Plus), 0.498075144596814, 1e-12);
  const auto g = fejer_phi(1.0).shifted(0.4);
  EXPECT_NEAR(pairing(g, 0.0, -0.5, HalfLine::Plus), 0.570577325588400, 1e-12);
  EXPECT_NEAR(pairing(g, 0.0, -0.5, HalfLine::Minus), 0.486008104921360, 1e-12);
}

TEST(Pairing, GaussianCustom) {
  const auto g = TestFunction::custom([](double t) { return std::exp(-t * t); },
                                      [](double tau) { return std::complex<double>(std::sqrt(std::numbers::pi) * std::exp(-tau * tau / 4)); },
                                      8.0, 7.0);
  EXPECT_NEAR(pairing(g, 0.0, -0.5, HalfLine::Plus), std::tgamma(0.25) / 2, 1e-12);
}

TEST(Pairing, LinearityAndReflection) {
  const auto f = fejer_phi(1.0), g = fejer_phi(0.7).shifted(-0.2);
  const double lhs = pairing(2.0 * f + g, 0.1, -0.5, HalfLine::Plus);
  const double rhs = 2.0 * pairing(f, 0.1, -0.5, HalfLine::Plus) + pairing(g, 0.1, -0.5, HalfLine::Plus);
  EXPECT_NEAR(lhs, rhs, 1e-12);
  EXPECT_NEAR(pairing(g.reflected(), -0.1, -0.5, HalfLine::Minus), pairing(g, 0.1, -0.5, HalfLine::Plus), 1e-12);
}

TEST(Pairing, BumpAgreesWithDirectQuadrature) {
  const auto b = bump_phi(1.0);
  const double direct =
      quad::integrate_power_weight([&](double t) { return b(t); }, -0.5, 600.0, {1e-13, 1e-13, 200000}).value;
  EXPECT_NEAR(pairing(b, 0.0, -0.5, HalfLine::Plus), direct, 1e-9);
}

TEST(Pairing, Errors) {
  EXPECT_THROW(pairing(fejer_phi(1.0), 0.0, -1.0, HalfLine::Plus), DomainError);
  EXPECT_THROW(pairing(fejer_phi(1.0), 0.0, 0.5, HalfLine::Plus), DomainError);
  EXPECT_THROW(fejer_phi(0.0), DomainError);
}

TEST(Prediction, OscillatorCoefficients) {
  const auto p2 = lambda0_predict(osc_power_model(1, 2).symbol(), fejer_phi(1.0));
  EXPECT_NEAR(p2.lambda0, 0.25 * 2.0 * std::numbers::sqrt2 / (3.0 * std::sqrt(std::numbers::pi)), 1e-12);
  EXPECT_DOUBLE_EQ(p2.exponent, -0.5);
  const auto p22 = lambda0_predict(osc_power_model(2, 2).symbol(), fejer_phi(1.0));
  EXPECT_NEAR(p22.lambda0, 0.0625, 1e-12);
  EXPECT_DOUBLE_EQ(p22.exponent, -1.0);
  const auto pm = lambda0_predict(osc_power_model(1, 2, -1.0).symbol(), fejer_phi(1.0));
  EXPECT_EQ(pm.side, HalfLine::Minus);
}

TEST(Fit, ExactPowerLaw) {
  std::vector<std::pair<double, double>> pts;
  for (double h : {1e-2, 1e-3, 1e-4}) pts.emplace_back(h, 3.0 * std::pow(h, -0.75));
  pts.emplace_back(1e-5, -1.0);
  const auto f = fit_exponent(pts);
  EXPECT_NEAR(f.slope, -0.75, 1e-13);
  EXPECT_NEAR(std::exp(f.intercept), 3.0, 1e-12);
  EXPECT_LT(f.residual, 1e-13);
  EXPECT_EQ(f.used, 3);
  ASSERT_EQ(f.excluded_h.size(), 1u);
  EXPECT_THROW(fit_exponent({{1e-2, 1.0}}), DomainError);
}

TEST(Gamma, SumAndGuards) {
  const auto model = osc_power_model(1, 2);
  const auto spec = spectrum(model, 1e-2, {-0.5, 0.5});
  const auto tf = fejer_phi(1.0);
  double direct = 0.0;
  for (double v : spec.expanded()) direct += tf(v / 1e-2);
  EXPECT_NEAR(gamma_sum(spec, 0.0, 1e-2, tf, 0.5), direct, 1e-14);
  EXPECT_THROW(gamma_sum(spec, 0.0, 1e-2, tf, 0.8), DomainError);
  SpectrumResult bad = spec;
  bad.converged = false;
  EXPECT_THROW(gamma_sum(bad, 0.0, 1e-2, tf, 0.5), DomainError);
}

TEST(Period, Bounds) {
  EXPECT_NEAR(*period_protection_bound(osc_power_model(1, 2), 1.0), std::pow(std::numbers::pi / 2, 2), 1e-14);
  EXPECT_NEAR(*period_protection_bound(quartic_model(), 1.0), std::pow(7.41629870920548767 / 4, 2), 1e-10);
  Jet p4(2, 4), p5(2, 5);
  p4.set({4, 0}, 1.0);
  p4.set({0, 4}, 1.0);
  p5.set({5, 0}, 0.1);
  const auto mixed = poly_symbol_model(make_symbol(1, 0.0, {p4, p5}, 0.0));
  EXPECT_FALSE(period_protection_bound(mixed, 1.0).has_value());
  EXPECT_THROW(run_trace(mixed, fejer_phi(1.0), 0.5, {0.1}), ConfigError);
  EXPECT_THROW(run_trace(osc_power_model(1, 2), fejer_phi(1.0), 3.0, {0.1}), ConfigError);
}

TEST(Run, GridValidationAndDeterminism) {
  const auto model = osc_power_model(1, 3);
  EXPECT_THROW(run_trace(model, fejer_phi(1.0), 0.5, {1e-3, 1e-2}), DomainError);
  EXPECT_THROW(run_trace(model, fejer_phi(1.0), 0.5, {}), DomainError);
  const auto grid = log_grid(1e-2, 1e-4, 5);
  EXPECT_DOUBLE_EQ(grid.front(), 1e-2);
  EXPECT_DOUBLE_EQ(grid.back(), 1e-4);
  TraceOptions one, three;
  one.threads = 1;
  three.threads = 3;
  const auto a = run_trace(model, fejer_phi(1.0), 0.5, grid, one);
  const auto b = run_trace(model, fejer_phi(1.0), 0.5, grid, three);
  for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_EQ(a.rows[i].gamma, b.rows[i].gamma);
  ASSERT_TRUE(a.fit.has_value());
  EXPECT_NEAR(a.fit->slope, -2.0 / 3.0, 0.02);
}

TEST(Run, QuantizedQuarticShortGrid) {
  const auto run = run_trace(quartic_model(), fejer_phi(1.0), 0.5, {0.1, 0.05});
  for (const auto& r : run.rows) {
    EXPECT_TRUE(r.converged);
    EXPECT_GT(r.basis_N, 0);
    EXPECT_NEAR(r.ratio, 1.0, 0.1);
  }
}

TEST(Fit, SyntheticExamples) {
  std::vector<std::pair<double, double>> clean, dirty;
  for (double h : log_grid(1e-2, 1e-5, 9)) {
    clean.emplace_back(h, 7.0 * std::pow(h, -0.5));
    dirty.emplace_back(h, std::pow(h, -0.5) * (1.0 + std::pow(h, 0.25)));
  }
  const auto c = fit_exponent(clean);
  EXPECT_NEAR(c.slope, -0.5, 1e-13);
  EXPECT_NEAR(c.intercept, std::log(7.0), 1e-12);
  EXPECT_LT(c.residual, 1e-12);
  const auto d = fit_exponent(dirty);
  EXPECT_GT(d.slope, -0.5);
  EXPECT_GT(d.residual, 1e-4);
  const auto two = fit_exponent({{1e-2, 3.0}, {1e-3, 5.0}});
  EXPECT_NEAR(two.slope, -std::log(5.0 / 3.0) / std::log(10.0), 1e-14);
  EXPECT_EQ(two.residual, 0.0);
}

TEST(Invariants, MaxMinDuality) {
  const auto tf = fejer_phi(1.0).shifted(0.4);
  const double h = 1e-4;
  const auto smax = spectrum(osc_power_model(1, 2, -1.0), h, {-0.5, 0.5});
  const auto smin = spectrum(osc_power_model(1, 2), h, {-0.5, 0.5});
  ASSERT_EQ(smax.count(), smin.count());
  for (std::size_t i = 0; i < smin.eigenvalues.size(); ++i)
    EXPECT_EQ(smax.eigenvalues[smax.eigenvalues.size() - 1 - i], -smin.eigenvalues[i]);
  const double gmax = gamma_sum(smax, 0.0, h, tf, 0.5);
  const double gmin = gamma_sum(smin, 0.0, h, tf.reflected(), 0.5);
  EXPECT_NEAR(gmax, gmin, 1e-13 * std::abs(gmin));
  const auto pmax = lambda0_predict(osc_power_model(1, 2, -1.0).symbol(), tf);
  const auto pmin = lambda0_predict(osc_power_model(1, 2).symbol(), tf.reflected());
  EXPECT_NEAR(pmax.lambda0, pmin.lambda0, 1e-13);
}

TEST(Invariants, LinearityInPhi) {
  const auto f1 = fejer_phi(1.0), f2 = fejer_phi(0.6).shifted(0.25);
  const double a = 1.7, b = -0.4;
  const auto combo = a * f1 + b * f2;
  const auto model = osc_power_model(1, 3);
  const auto spec = spectrum(model, 1e-4, {-0.5, 0.5});
  const double g = gamma_sum(spec, 0.0, 1e-4, combo, 0.5);
  const double g1 = gamma_sum(spec, 0.0, 1e-4, f1, 0.5), g2 = gamma_sum(spec, 0.0, 1e-4, f2, 0.5);
  EXPECT_NEAR(g, a * g1 + b * g2, 1e-10 * std::abs(g));
  const auto s = model.symbol();
  EXPECT_NEAR(lambda0_predict(s, combo).lambda0, a * lambda0_predict(s, f1).lambda0 + b * lambda0_predict(s, f2).lambda0,
              1e-10);
}

TEST(Invariants, WindowRobustnessAtSmallestH) {
  struct Case {
    OperatorModel model;
    TestFunction tf;
    double h;
  };
  const std::vector<Case> cases{{osc_power_model(1, 2), fejer_phi(1.0), 1e-5},
                                {osc_power_model(1, 3), fejer_phi(1.0), 1e-5},
                                {osc_power_model(2, 2), fejer_phi(1.0), 1e-5},
                                {osc_power_model(1, 2, -1.0), fejer_phi(1.0).shifted(0.4), 1e-5},
                                {osc_power_model(1, 2, 1.0, 0.3), fejer_phi(1.0), 1e-5},
                                {quartic_model(), fejer_phi(1.0), 3e-3}};
  for (const auto& c : cases) {
    const auto spec = spectrum(c.model, c.h, {-0.5, 0.5});
    const double full = gamma_sum(spec, 0.0, c.h, c.tf, 0.5), half = gamma_sum(spec, 0.0, c.h, c.tf, 0.25);
    EXPECT_LE(std::abs(full - half), 1e-2 * std::abs(full)) << "k=" << c.model.k() << " n=" << c.model.n;
  }
}
