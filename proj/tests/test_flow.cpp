#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "degentrace/errors.hpp"
#include "degentrace/flow.hpp"
#include "degentrace/runner.hpp"

using namespace degentrace;

namespace {

SymbolModel quartic_osc(int order = 6) { return make_symbol(1, 0.0, {oscillator_power(1, 2, 1.0)}, 0.0, order); }

SymbolModel quartic_with_p5(int order = 6) {
  Jet p4(2, 4), p5(2, 5);
  p4.set({4, 0}, 1.0);
  p4.set({0, 4}, 1.0);
  p5.set({5, 0}, 0.3);
  p5.set({2, 3}, -0.2);
  return make_symbol(1, 0.0, {p4, p5}, 0.0, order);
}

const std::vector<double> kGrid{-2.0, -1.0, 0.0, 1.0, 2.0};

}  // namespace

TEST(TimeJet, IntegrateDifferentiate) {
  TimeJet a(Jet::variable(2, 3, 0));
  const TimeJet i = a.integrate();
  EXPECT_EQ(i.time_degree(), 1);
  EXPECT_DOUBLE_EQ(i.at(2.5).coeff({1, 0}), 2.5);
  const TimeJet d = i.derivative();
  EXPECT_DOUBLE_EQ(d.at(7.0).coeff({1, 0}), 1.0);
  EXPECT_EQ((i * i).time_degree(), 2);
}

TEST(FaaDiBruno, PartitionCountsAreBellNumbers) {
  const long long bell[] = {1, 1, 2, 5, 15, 52, 203, 877};
  for (int m = 1; m <= 7; ++m) {
    long long total = 0;
    for (const auto& t : faa_di_bruno_terms(m)) total += t.count;
    EXPECT_EQ(total, bell[m]) << "m=" << m;
  }
}

TEST(Flow, DegeneracyLadderAndFirstJet) {
  for (const auto& s : {quartic_osc(), quartic_with_p5(), make_symbol(1, 0.0, {oscillator_power(1, 3, -1.0)}, 0.0, 8),
                        make_symbol(2, 0.0, {oscillator_power(2, 2, 1.0)}, 0.0, 5)}) {
    const auto fc = flow_check(s, s.order(), kGrid, 1.0);
    EXPECT_TRUE(fc.degeneracy_ok);
    EXPECT_EQ(fc.first_jet_residual, 0.0);
    EXPECT_LT(fc.group_law_residual, 1e-12);
  }
}

TEST(Flow, LinearPartIsIdentity) {
  const auto fj = flow_jet(quartic_osc(), 5, 3.0);
  EXPECT_EQ(fj.jet[0].coeff({1, 0}), 1.0);
  EXPECT_EQ(fj.jet[1].coeff({0, 1}), 1.0);
  EXPECT_EQ(fj.jet[0].constant_term(), 0.0);
}

TEST(Flow, QuarticOscillatorSeriesMatchesRotation) {
  // For p = q^2 the flow is a rotation by angle 4 q t in the (x, xi) plane.
  const auto s = quartic_osc(8);
  const auto series = flow_series(s, 7);
  const std::vector<double> z{0.02, -0.01};
  const double q = z[0] * z[0] + z[1] * z[1];
  for (double t : {-2.0, 0.5, 2.0}) {
    const double w = 4 * q * t;
    const double ex = std::cos(w) * z[0] + std::sin(w) * z[1];
    const double ey = -std::sin(w) * z[0] + std::cos(w) * z[1];
    const auto jet = series.at(t).eval(z);
    EXPECT_NEAR(jet[0], ex, 1e-12);
    EXPECT_NEAR(jet[1], ey, 1e-12);
  }
}

TEST(Flow, NumericConservesEnergyAndNorm) {
  const auto s = quartic_osc();
  const std::vector<double> z{0.6, -0.3};
  const auto out = flow_numeric(s, z, 2.0, 1e-12);
  const double q0 = z[0] * z[0] + z[1] * z[1], q1 = out[0] * out[0] + out[1] * out[1];
  EXPECT_NEAR(q1, q0, 1e-10);
  const auto p4 = quartic_with_p5();
  const auto o2 = flow_numeric(p4, z, -1.5, 1e-12);
  EXPECT_NEAR(p4.principal(5).eval(o2), p4.principal(5).eval(z), 1e-10);
}

TEST(Flow, JetAgreesWithIntegrator) {
  const auto s = quartic_with_p5();
  const int m = 3;
  const auto series = flow_series(s, m);
  double prev = 0.0;
  for (double r : {2.5e-3, 1.25e-3, 6.25e-4}) {
    const std::vector<double> z{r * 0.6, -r * 0.8};
    const auto exact = flow_numeric(s, z, 1.5, 1e-15);
    const auto jet = series.at(1.5).eval(z);
    const double err = std::max(std::abs(exact[0] - jet[0]), std::abs(exact[1] - jet[1]));
    if (prev > 0.0) {
      EXPECT_GT(std::log2(prev / err), m + 1 - 0.05);
    }
    prev = err;
  }
}

TEST(Flow, DegreeAboveDataIsDomainError) {
  EXPECT_THROW(flow_series(quartic_osc(4), 4), DomainError);
  EXPECT_THROW(generating_series(quartic_osc(4), 5), DomainError);
}

TEST(Generating, LeadingTermIsExact) {
  for (const auto& s : {quartic_osc(), quartic_with_p5(), make_symbol(2, 0.0, {oscillator_power(2, 2, 1.0)}, 0.0, 5)}) {
    for (double t : kGrid) {
      const auto g = generating_jet(s, s.order(), t);
      EXPECT_EQ(homogeneous_part(g.S, s.k()), s.leading().with_order(s.order()) * (-t));
    }
  }
}

TEST(Generating, ResidualsVanish) {
  for (const auto& s : {quartic_osc(), quartic_with_p5(7)}) {
    const auto rep = phase_structure_check(s, s.order(), kGrid);
    EXPECT_LE(rep.hj_residual, 1e-12);
    EXPECT_LE(rep.generating_residual, 1e-12);
    EXPECT_LE(rep.max_residual, 1e-12);
  }
}

TEST(Generating, TimeDegreesOfPhase) {
  const auto rep = phase_structure_check(quartic_with_p5(7), 7, kGrid);
  ASSERT_GE(rep.max_time_degree.size(), 8u);
  EXPECT_EQ(rep.max_time_degree[3], -1);
  EXPECT_EQ(rep.max_time_degree[4], 1);
  EXPECT_EQ(rep.max_time_degree[5], 1);
  EXPECT_GE(rep.max_time_degree[6], 2);
}

TEST(Generating, PairingAndEnergyTerms) {
  const auto s = make_symbol(1, 1.5, {oscillator_power(1, 2, 1.0)}, 0.0, 6);
  const auto g = generating_series(s, 6);
  const Jet S = g.generating_function(2.0);
  EXPECT_DOUBLE_EQ(S.coeff({1, 1}), 1.0);
  EXPECT_DOUBLE_EQ(S.constant_term(), -3.0);
}

TEST(NormalForm, JacobianIsTimeIndependent) {
  const auto s = quartic_with_p5();
  for (double th : {0.0, 0.4, 1.9}) {
    const std::vector<double> theta{std::cos(th), std::sin(th)};
    const double expect = std::pow(s.leading_at(theta), 0.25);
    const double a = normal_form_jacobian(s, 0.0, theta), b = normal_form_jacobian(s, 5.0, theta);
    EXPECT_EQ(a, b);
    EXPECT_NEAR(a, expect, 1e-14);
  }
  EXPECT_NEAR(normal_form_jacobian(quartic_osc(), 1.0, std::vector<double>{std::sqrt(0.5), std::sqrt(0.5)}), 1.0, 1e-14);
}
