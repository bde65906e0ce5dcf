#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "degentrace/errors.hpp"
#include "degentrace/spectrum.hpp"

using namespace degentrace;

namespace {

Jet quartic_xx() {
  Jet p(2, 4);
  p.set({4, 0}, 1.0);
  p.set({0, 4}, 1.0);
  return p;
}

OperatorModel as_poly(const Jet& p, double shift = 0.0) { return poly_symbol_model(make_symbol(1, 0.0, {p}, 0.0), shift); }

}  // namespace

TEST(Eigen, SymmetricInvariants) {
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int n = 50;
  Matrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) a(i, j) = a(j, i) = u(rng);
  const auto ev = eigenvalues_sym(a);
  ASSERT_EQ(ev.size(), static_cast<std::size_t>(n));
  EXPECT_TRUE(std::is_sorted(ev.begin(), ev.end()));
  double tr = 0.0, fro = 0.0, s1 = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    tr += a(i, i);
    for (int j = 0; j < n; ++j) fro += a(i, j) * a(i, j);
    s1 += ev[i];
    s2 += ev[i] * ev[i];
  }
  EXPECT_NEAR(s1, tr, 1e-12);
  EXPECT_NEAR(s2, fro, 1e-11);
}

TEST(Eigen, KnownSmallCases) {
  Matrix a(2, 2);
  a(0, 0) = 2.0;
  a(0, 1) = a(1, 0) = 1.0;
  a(1, 1) = 2.0;
  const auto ev = eigenvalues_sym(a);
  EXPECT_NEAR(ev[0], 1.0, 1e-15);
  EXPECT_NEAR(ev[1], 3.0, 1e-15);
  // [[1, i], [-i, 1]] has eigenvalues 0 and 2.
  Matrix re(2, 2), im(2, 2);
  re(0, 0) = re(1, 1) = 1.0;
  im(0, 1) = 1.0;
  im(1, 0) = -1.0;
  const auto eh = eigenvalues_hermitian(re, im);
  ASSERT_EQ(eh.size(), 2u);
  EXPECT_NEAR(eh[0], 0.0, 1e-15);
  EXPECT_NEAR(eh[1], 2.0, 1e-15);
}

TEST(Ladder, CanonicalCommutator) {
  const double h = 0.1;
  const auto lp = ladder_matrices(8, h);
  const Matrix c = lp.X * lp.P_imag - lp.P_imag * lp.X;
  for (int i = 0; i + 1 < 8; ++i) {
    EXPECT_NEAR(c(i, i), h, 1e-15);
    for (int j = 0; j + 1 < 8; ++j)
      if (i != j) {
        EXPECT_NEAR(c(i, j), 0.0, 1e-15);
      }
  }
  EXPECT_THROW(ladder_matrices(1, h), DomainError);
}

TEST(Weyl, HarmonicOscillatorIsExact) {
  const double h = 0.3;
  const auto w = weyl_quantize(oscillator_power(1, 1, 1.0), 6, h);
  const auto ev = eigenvalues_sym(w.re);
  for (int j = 0; j < 6; ++j) EXPECT_NEAR(ev[j], h * (2 * j + 1), 1e-14);
  EXPECT_LT(w.asymmetry, 1e-15);
}

TEST(Weyl, OddSymbolIsImaginaryAntisymmetric) {
  // Op(x xi) = (x p + p x) / 2 is purely imaginary in the Hermite basis.
  const auto w = weyl_quantize(Jet::monomial(2, 2, {1, 1}, 1.0), 6, 0.2);
  EXPECT_EQ(w.re.rows(), 6);
  double re_max = 0.0, im_max = 0.0;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) {
      re_max = std::max(re_max, std::abs(w.re(i, j)));
      im_max = std::max(im_max, std::abs(w.im(i, j)));
    }
  EXPECT_EQ(re_max, 0.0);
  EXPECT_GT(im_max, 0.1);
}

TEST(Spectrum, QuantizedOscPowersMatchMoyal) {
  const double h = 0.05;
  for (int m : {2, 3}) {
    const auto r = spectrum(as_poly(oscillator_power(1, m, 1.0)), h, {-0.5, 0.5});
    ASSERT_TRUE(r.converged);
    ASSERT_GT(r.count(), 3);
    for (std::size_t j = 0; j < r.eigenvalues.size(); ++j) {
      const double e = h * (2.0 * j + 1);
      EXPECT_NEAR(r.eigenvalues[j], std::pow(e, m) + moyal_correction(m, h, e), 1e-12) << "m=" << m << " j=" << j;
    }
  }
  EXPECT_THROW(moyal_correction(4, h, 1.0), DomainError);
}

TEST(Spectrum, ClosedFormLevelsAndMultiplicity) {
  const auto r1 = closed_form_spectrum(osc_power_model(1, 2), 0.1, {-0.5, 0.5});
  ASSERT_EQ(r1.eigenvalues.size(), 4u);
  EXPECT_NEAR(r1.eigenvalues[1], 0.09, 1e-15);
  EXPECT_NEAR(r1.eigenvalues[3], 0.49, 1e-15);
  const auto r2 = closed_form_spectrum(osc_power_model(2, 2), 0.1, {-1.0, 1.0});
  ASSERT_EQ(r2.multiplicities.size(), 5u);
  for (std::size_t J = 0; J < 5; ++J) EXPECT_EQ(r2.multiplicities[J], static_cast<long long>(J + 1));
  EXPECT_EQ(r2.count(), 15);
  const auto rm = closed_form_spectrum(osc_power_model(1, 2, -1.0, 0.3), 0.1, {-0.5, 0.5});
  EXPECT_NEAR(rm.eigenvalues.back(), -0.01 + 0.03, 1e-15);
}

TEST(Spectrum, QuarticAutoMatchesLargeFixedBasis) {
  const double h = 0.05;
  const auto model = as_poly(quartic_xx());
  const auto a = spectrum(model, h, {-0.5, 0.5});
  ASSERT_TRUE(a.converged);
  SpectrumOptions big;
  big.auto_N = false;
  big.fixed_N = 2 * a.basis_N;
  const auto f = spectrum(model, h, {-0.5, 0.5}, big);
  ASSERT_EQ(a.eigenvalues.size(), f.eigenvalues.size());
  for (std::size_t i = 0; i < a.eigenvalues.size(); ++i) EXPECT_NEAR(a.eigenvalues[i], f.eigenvalues[i], 1e-10);
  EXPECT_GT(a.eigenvalues.front(), 0.0);
}

TEST(Spectrum, ShiftMovesLevels) {
  const auto a = spectrum(as_poly(quartic_xx()), 0.05, {-0.5, 0.5});
  const auto b = spectrum(as_poly(quartic_xx(), 0.4), 0.05, {-0.5, 0.5});
  EXPECT_NEAR(b.eigenvalues.front() - a.eigenvalues.front(), 0.02, 1e-12);
}

TEST(Spectrum, MaximumUsesUpperLevels) {
  const auto r = spectrum(as_poly(oscillator_power(1, 2, -1.0)), 0.05, {-0.5, 0.5});
  ASSERT_TRUE(r.converged);
  const double top = -(0.05 * 0.05) - 0.05 * 0.05;
  EXPECT_NEAR(r.eigenvalues.back(), top, 1e-12);
}

TEST(Spectrum, Errors) {
  EXPECT_THROW(spectrum(osc_power_model(1, 2), -0.1, {-1, 1}), DomainError);
  EXPECT_THROW(spectrum(osc_power_model(1, 2), 0.1, {1, -1}), DomainError);
  SpectrumOptions tiny;
  tiny.N_max = 64;
  EXPECT_THROW(spectrum(as_poly(quartic_xx()), 1e-3, {-0.5, 0.5}, tiny), ConvergenceError);
  EXPECT_THROW(osc_power_model(1, 1), HypothesisError);
  EXPECT_THROW(poly_symbol_model(make_symbol(2, 0.0, {oscillator_power(2, 2, 1.0)}, 0.0)), DomainError);
}
