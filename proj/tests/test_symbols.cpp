#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "degentrace/errors.hpp"
#include "degentrace/symbols.hpp"

using namespace degentrace;

namespace {

Jet quartic(double a, double b, double c) {
  Jet p(2, 4);
  p.set({4, 0}, a);
  p.set({2, 2}, b);
  p.set({0, 4}, c);
  return p;
}

// p(R z) for the rotation by angle a in the (x, xi) plane.
Jet rotated(const Jet& p, double a) {
  const Jet x = Jet::variable(2, p.order(), 0), y = Jet::variable(2, p.order(), 1);
  return jet_compose(p, std::vector<Jet>{std::cos(a) * x - std::sin(a) * y, std::sin(a) * x + std::cos(a) * y});
}

}  // namespace

TEST(Symbol, QuarticSphereIntegral) {
  const auto s = make_symbol(1, 0.0, {quartic(1.0, 0.0, 1.0)}, 0.0);
  EXPECT_EQ(s.k(), 4);
  EXPECT_EQ(s.extremum(), Extremum::Minimum);
  EXPECT_NEAR(sphere_integral(s, 1e-14), 7.41629870920548767, 1e-12);
}

TEST(Symbol, OscillatorSphereIntegrals) {
  EXPECT_NEAR(sphere_integral(make_symbol(1, 0.0, {oscillator_power(1, 2, 1.0)}, 0.0), 1e-14), 2 * std::numbers::pi,
              1e-13);
  EXPECT_NEAR(sphere_integral(make_symbol(1, 0.0, {oscillator_power(1, 3, 1.0)}, 0.0), 1e-14), 2 * std::numbers::pi,
              1e-13);
  EXPECT_NEAR(sphere_integral(make_symbol(2, 0.0, {oscillator_power(2, 2, 1.0)}, 0.0), 1e-13),
              2 * std::numbers::pi * std::numbers::pi, 1e-11);
}

TEST(Symbol, SphereIntegralScaling) {
  // I_k(c p) = c^(-2n/k) I_k(p)
  const double base = sphere_integral(make_symbol(1, 0.0, {quartic(1.0, 0.5, 2.0)}, 0.0), 1e-14);
  const double scaled = sphere_integral(make_symbol(1, 0.0, {quartic(3.0, 1.5, 6.0)}, 0.0), 1e-14);
  EXPECT_NEAR(scaled, base * std::pow(3.0, -0.5), 1e-12);
}

TEST(Symbol, SphereIntegralRotationInvariant) {
  const Jet p = quartic(1.0, 0.0, 1.0);
  const double base = sphere_integral(make_symbol(1, 0.0, {p}, 0.0), 1e-14);
  for (double a : {0.3, 1.1, 2.5}) {
    const double r = sphere_integral(make_symbol(1, 0.0, {rotated(p, a)}, 0.0), 1e-14);
    EXPECT_NEAR(r, base, 1e-11);
  }
}

TEST(Symbol, MaximumDetected) {
  const auto s = make_symbol(1, 2.0, {oscillator_power(1, 3, -1.0)}, 0.1);
  EXPECT_EQ(s.k(), 6);
  EXPECT_EQ(s.extremum(), Extremum::Maximum);
  EXPECT_DOUBLE_EQ(s.critical_energy(), 2.0);
  EXPECT_DOUBLE_EQ(s.p1(), 0.1);
}

TEST(Symbol, LowerDegreeComponentsAreStored) {
  Jet p5(2, 5);
  p5.set({5, 0}, 0.3);
  const auto s = make_symbol(1, 0.0, {quartic(1.0, 0.0, 1.0), p5}, 0.0);
  EXPECT_EQ(s.k(), 4);
  EXPECT_EQ(s.order(), 5);
  EXPECT_DOUBLE_EQ(s.component(5).coeff({5, 0}), 0.3);
  EXPECT_EQ(with_order(s, 8).order(), 8);
}

TEST(Symbol, IndefiniteLeadingIsH4) {
  try {
    make_symbol(1, 0.0, {quartic(1.0, 0.0, -1.0)}, 0.0);
    FAIL() << "expected HypothesisError";
  } catch (const HypothesisError& e) {
    EXPECT_EQ(e.hypothesis(), "H4");
    ASSERT_EQ(e.direction().size(), 2u);
  }
}

TEST(Symbol, DegenerateLeadingIsH4) {
  // x^4 vanishes on the xi axis.
  try {
    make_symbol(1, 0.0, {quartic(1.0, 0.0, 0.0)}, 0.0);
    FAIL() << "expected HypothesisError";
  } catch (const HypothesisError& e) {
    EXPECT_EQ(e.hypothesis(), "H4");
    EXPECT_NEAR(std::abs(e.direction()[1]), 1.0, 1e-6);
  }
}

TEST(Symbol, QuadraticIsH2) {
  try {
    make_symbol(1, 0.0, {oscillator_power(1, 1, 1.0)}, 0.0);
    FAIL() << "expected HypothesisError";
  } catch (const HypothesisError& e) {
    EXPECT_EQ(e.hypothesis(), "H2");
  }
}

TEST(Symbol, InhomogeneousComponentIsH2) {
  Jet mixed = quartic(1.0, 0.0, 1.0);
  mixed.set({3, 0}, 1.0);
  EXPECT_THROW(make_symbol(1, 0.0, {mixed}, 0.0), HypothesisError);
}

TEST(Symbol, StructuralChecks) {
  EXPECT_THROW(make_symbol(3, 0.0, {Jet(2, 4)}, 0.0), DomainError);
  EXPECT_THROW(make_symbol(1, 0.0, {oscillator_power(2, 2, 1.0)}, 0.0), StructuralError);
  EXPECT_THROW(make_symbol(1, 0.0, {quartic(1.0, 0.0, 1.0)}, 0.0, 3), DomainError);
}

TEST(Symbol, HamiltonianField) {
  const auto s = make_symbol(1, 0.0, {oscillator_power(1, 2, 1.0)}, 0.0);
  const auto X = hamiltonian_field(s, 4);
  // p = (x^2 + xi^2)^2: X = (4 xi q, -4 x q)
  const std::vector<double> z{0.3, -0.6};
  const double q = z[0] * z[0] + z[1] * z[1];
  EXPECT_NEAR(X[0].eval(z), 4 * z[1] * q, 1e-15);
  EXPECT_NEAR(X[1].eval(z), -4 * z[0] * q, 1e-15);
  EXPECT_THROW(hamiltonian_field(s, 5), DomainError);
}
