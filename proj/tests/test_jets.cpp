#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "degentrace/errors.hpp"
#include "degentrace/jets.hpp"
#include "support.hpp"

using namespace degentrace;
using degentrace::testing::diff_through;
using degentrace::testing::random_jet;

TEST(JetLayout, SizesAndGradedOrder) {
  const auto L = JetLayout::get(2, 3);
  EXPECT_EQ(L->size(), 10u);
  EXPECT_EQ(L->degree_begin(2), 3u);
  EXPECT_EQ(L->degree_end(2), 6u);
  int prev = 0;
  for (std::size_t p = 0; p < L->size(); ++p) {
    EXPECT_GE(L->degree_of(p), prev);
    prev = L->degree_of(p);
    EXPECT_EQ(L->position(L->monomial(p)), p);
  }
  EXPECT_EQ(JetLayout::get(4, 6)->size(), 210u);
}

TEST(Jet, RingLaws) {
  std::mt19937 rng(7);
  for (int dim : {1, 2, 4}) {
    const Jet a = random_jet(rng, dim, 5), b = random_jet(rng, dim, 5), c = random_jet(rng, dim, 5);
    EXPECT_LT(diff_through(a * b, b * a, 5), 1e-14);
    EXPECT_LT(diff_through((a * b) * c, a * (b * c), 5), 1e-13);
    EXPECT_LT(diff_through(a * (b + c), a * b + a * c, 5), 1e-13);
    EXPECT_EQ(a + Jet(dim, 5), a);
    EXPECT_EQ(a * Jet::constant(dim, 5, 1.0), a);
    EXPECT_TRUE((a - a).is_zero());
  }
}

TEST(Jet, ProductTruncatesAboveOrder) {
  Jet x = Jet::variable(2, 3, 0), y = Jet::variable(2, 3, 1);
  Jet p = x * x * y * y;
  EXPECT_TRUE(p.is_zero());
  Jet q = x * x * y;
  EXPECT_DOUBLE_EQ(q.coeff({2, 1}), 1.0);
  EXPECT_EQ(q.highest_degree(), 3);
}

TEST(Jet, KnownProduct) {
  // (1 + x + y)^2 = 1 + 2x + 2y + x^2 + 2xy + y^2
  Jet a = Jet::constant(2, 2, 1.0) + Jet::variable(2, 2, 0) + Jet::variable(2, 2, 1);
  Jet s = a * a;
  EXPECT_DOUBLE_EQ(s.coeff({0, 0}), 1.0);
  EXPECT_DOUBLE_EQ(s.coeff({1, 0}), 2.0);
  EXPECT_DOUBLE_EQ(s.coeff({1, 1}), 2.0);
  EXPECT_DOUBLE_EQ(s.coeff({0, 2}), 1.0);
}

TEST(Jet, EvalMatchesPointwiseProduct) {
  std::mt19937 rng(3);
  const Jet a = random_jet(rng, 3, 6).with_order(6), b = random_jet(rng, 3, 6);
  const Jet a3 = homogeneous_part(a, 0) + homogeneous_part(a, 1) + homogeneous_part(a, 2) + homogeneous_part(a, 3);
  const Jet b3 = homogeneous_part(b, 0) + homogeneous_part(b, 1) + homogeneous_part(b, 2) + homogeneous_part(b, 3);
  const std::vector<double> z{0.3, -0.7, 0.45};
  EXPECT_NEAR((a3 * b3).eval(z), a3.eval(z) * b3.eval(z), 1e-13);
}

TEST(Jet, DerivativeLeibniz) {
  std::mt19937 rng(11);
  const Jet a = random_jet(rng, 2, 6), b = random_jet(rng, 2, 6);
  for (int i = 0; i < 2; ++i) {
    const Jet lhs = jet_diff(a * b, i);
    const Jet rhs = jet_diff(a, i) * b + a * jet_diff(b, i);
    EXPECT_LT(diff_through(lhs, rhs, 5), 1e-13);
  }
}

TEST(Jet, DerivativeOfMonomial) {
  const Jet m = Jet::monomial(2, 6, {3, 2}, 2.0);
  const Jet d = jet_diff(m, 0);
  EXPECT_DOUBLE_EQ(d.coeff({2, 2}), 6.0);
  EXPECT_THROW(jet_diff(m, 2), StructuralError);
}

TEST(Jet, ChainRule) {
  std::mt19937 rng(5);
  const int dim = 2, N = 6;
  const Jet f = random_jet(rng, dim, N);
  const std::vector<Jet> g{random_jet(rng, dim, N, 1), random_jet(rng, dim, N, 1)};
  const Jet fg = jet_compose(f, g);
  for (int i = 0; i < dim; ++i) {
    Jet rhs(dim, N);
    for (int j = 0; j < dim; ++j) rhs += jet_compose(jet_diff(f, j), g) * jet_diff(g[j], i);
    EXPECT_LT(diff_through(jet_diff(fg, i), rhs, N - 1), 1e-12);
  }
}

TEST(Jet, ComposeMatchesEvaluation) {
  // f(u, v) = u^2 v with u = x + y, v = x - 2y  ->  f = (x + y)^2 (x - 2y)
  const Jet f = Jet::monomial(2, 3, {2, 1}, 1.0);
  const Jet x = Jet::variable(2, 3, 0), y = Jet::variable(2, 3, 1);
  const Jet c = jet_compose(f, std::vector<Jet>{x + y, x - 2.0 * y});
  const std::vector<double> z{0.4, -1.1};
  EXPECT_NEAR(c.eval(z), std::pow(z[0] + z[1], 2) * (z[0] - 2 * z[1]), 1e-14);
}

TEST(Jet, ComposeIdentityAndAssociativity) {
  std::mt19937 rng(9);
  const int N = 5;
  const VectorJet id = VectorJet::identity(2, N);
  const VectorJet f({random_jet(rng, 2, N, 1), random_jet(rng, 2, N, 1)});
  const VectorJet g({random_jet(rng, 2, N, 1), random_jet(rng, 2, N, 1)});
  const VectorJet h({random_jet(rng, 2, N, 1), random_jet(rng, 2, N, 1)});
  const auto fi = jet_compose(f, id);
  for (int c = 0; c < 2; ++c) EXPECT_LT(diff_through(fi[c], f[c], N), 1e-15);
  const auto l = jet_compose(jet_compose(f, g), h), r = jet_compose(f, jet_compose(g, h));
  for (int c = 0; c < 2; ++c) EXPECT_LT(diff_through(l[c], r[c], N), 1e-12);
}

TEST(Jet, ComposeRejectsConstantTerm) {
  const Jet f = Jet::variable(1, 3, 0);
  EXPECT_THROW(jet_compose(f, std::vector<Jet>{Jet::constant(1, 3, 1.0)}), DomainError);
  EXPECT_THROW(jet_compose(f, std::vector<Jet>{}), StructuralError);
}

TEST(Jet, ShapeMismatchIsStructural) {
  EXPECT_THROW(Jet(2, 3) + Jet(2, 4), StructuralError);
  EXPECT_THROW(Jet(2, 3) * Jet(1, 3), StructuralError);
  EXPECT_THROW(Jet::variable(2, 3, 5), StructuralError);
}

TEST(Jet, HomogeneousSplit) {
  std::mt19937 rng(1);
  const Jet a = random_jet(rng, 4, 4);
  Jet sum(4, 4);
  for (int j = 0; j <= 4; ++j) sum += homogeneous_part(a, j);
  EXPECT_EQ(sum, a);
  EXPECT_EQ(homogeneous_part(a, 3).lowest_degree(), 3);
}
