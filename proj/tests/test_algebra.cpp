#include <gtest/gtest.h>

#include <chrono>
#include <random>

#include "obspinn/algebra/groebner.hpp"

using namespace obspinn;

namespace {

const Symbol T = Symbol::state(0), X = Symbol::state(1), Y = Symbol::state(2);
const Symbol A = Symbol::param(0), B = Symbol::param(1), C = Symbol::param(2);

JetPoly v(Symbol s) { return JetPoly(s); }
JetPoly q(long n, long d = 1) { return JetPoly(make_rational(n, d)); }

JetPoly random_poly(std::mt19937& rng, const std::vector<Symbol>& syms, int terms) {
  std::uniform_int_distribution<int> coef(-5, 5), den(1, 3), expo(0, 2);
  JetPoly p;
  for (int k = 0; k < terms; ++k) {
    std::vector<Monomial::Factor> f;
    for (Symbol s : syms) f.emplace_back(s, static_cast<std::uint32_t>(expo(rng)));
    p.add_term(Monomial::from_factors(f), make_rational(coef(rng), den(rng)));
  }
  return p;
}

}  // namespace

TEST(JetPoly, ZeroCoefficientsAreDropped) {
  JetPoly p = v(X) + v(Y) - v(X);
  EXPECT_EQ(p, v(Y));
  EXPECT_EQ(p.size(), 1u);
  EXPECT_TRUE((v(X) - v(X)).is_zero());
}

TEST(JetPoly, RingAxiomsOnRandomTriples) {
  std::mt19937 rng(7);
  const std::vector<Symbol> syms{X, Y, A};
  for (int trial = 0; trial < 50; ++trial) {
    const auto p = random_poly(rng, syms, 4), r = random_poly(rng, syms, 3), s = random_poly(rng, syms, 3);
    EXPECT_EQ((p * r) * s, p * (r * s));
    EXPECT_EQ(p * r, r * p);
    EXPECT_EQ(p + r, r + p);
    EXPECT_EQ(p * (r + s), p * r + p * s);
    EXPECT_EQ((p + r) + s, p + (r + s));
    EXPECT_TRUE((p - p).is_zero());
  }
}

TEST(JetPoly, PartialAndSubstitute) {
  const JetPoly p = v(X).pow(3) * v(A) + q(2) * v(X) * v(Y);
  EXPECT_EQ(p.partial(X), q(3) * v(X).pow(2) * v(A) + q(2) * v(Y));
  EXPECT_EQ(p.substitute({{X, v(Y) + q(1)}}),
            (v(Y) + q(1)).pow(3) * v(A) + q(2) * (v(Y) + q(1)) * v(Y));
}

TEST(JetPoly, Printing) {
  const JetPoly p = q(13, 50) * v(X) * v(Y) - v(X) + q(1);
  EXPECT_EQ(p.to_string(), "13/50*x2*x3 - x2 + 1");
  EXPECT_EQ(JetPoly().to_string(), "0");
  EXPECT_EQ((-v(A)).to_string(), "-theta1");
}

TEST(Gcd, ExactDivision) {
  const JetPoly f = (v(A) + v(B)) * (v(A) - q(2) * v(C));
  EXPECT_EQ(exact_divide(f, v(A) + v(B)), v(A) - q(2) * v(C));
  EXPECT_THROW(exact_divide(f, v(A) + q(1)), InexactDivision);
}

TEST(Gcd, MultivariateCommonFactor) {
  const JetPoly common = v(A) + v(B);
  const JetPoly f = common * (v(A) - v(B)) * v(C);
  const JetPoly g = common * v(C).pow(2) * q(6);
  EXPECT_EQ(gcd(f, g), common * v(C));
  EXPECT_EQ(gcd(v(A) + q(1), v(A) - q(1)), q(1));
  EXPECT_EQ(gcd(q(3, 2) * v(A) * v(B), q(9) * v(A).pow(2)), v(A));
}

TEST(Gcd, HighDegreeUnivariateStaysFast) {
  const JetPoly common = q(3) * v(A).pow(2) + q(5) * v(A) - q(7);
  const JetPoly f = common * (v(A) + q(2)).pow(25);
  const JetPoly g = common * (q(3) * v(A) - q(1)).pow(25);
  const auto start = std::chrono::steady_clock::now();
  EXPECT_EQ(gcd(f, g), common);
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(), 5.0);
}

TEST(Gcd, IntegerPrimitive) {
  const auto [factor, p] = integer_primitive(q(-1, 2) * v(A) + q(3, 4));
  EXPECT_EQ(p, q(2) * v(A) - q(3));
  EXPECT_EQ(factor, make_rational(-4));
}

TEST(Groebner, NormalFormOfGeneratorMultiples) {
  const auto o = MonomialOrder::lex({T, X, Y});
  EXPECT_TRUE(normal_form(v(X).pow(2), {v(X)}, o).is_zero());
  const JetPoly g1 = v(X) - v(T) * v(Y);
  EXPECT_TRUE(normal_form(g1, {g1, v(Y) - q(1)}, o).is_zero());
}

TEST(Groebner, HandEliminationOracle) {
  // t = x, y = t^2 gives y = x^2 once t is eliminated.
  const auto o = MonomialOrder::lex({T, X, Y});
  const std::vector<JetPoly> gens{v(X) - v(T), v(Y) - v(T).pow(2)};
  const JetPoly target = v(Y) - v(X).pow(2);
  EXPECT_FALSE(normal_form(target, gens, o).is_zero());
  const auto G = buchberger(gens, o);
  ASSERT_EQ(G.generators.size(), 2u);
  EXPECT_EQ(G.generators[0], v(T) - v(X));
  EXPECT_EQ(G.generators[1], v(X).pow(2) - v(Y));
  EXPECT_TRUE(is_member(target, G));
  EXPECT_EQ(dump(G), "x1-x2,\nx2*x2-x3\n");
}

TEST(Groebner, UnitIdeal) {
  const auto o = MonomialOrder::lex({X, Y});
  const auto G = buchberger({q(1)}, o);
  EXPECT_TRUE(G.is_unit());
  const auto H = buchberger({v(X) * v(Y) - q(1), v(X)}, o);
  EXPECT_TRUE(H.is_unit());
}

TEST(Groebner, MembershipOfConstants) {
  const auto o = MonomialOrder::lex({X, Y});
  const auto G = buchberger({v(X) * v(X) - v(Y), v(X) * v(Y)}, o);
  EXPECT_FALSE(is_member(q(1), G));
  EXPECT_FALSE(is_member(v(A), G));
  for (const auto& g : G.generators) EXPECT_TRUE(is_member(g, G));
}

TEST(Groebner, ParametricCoefficientsStayInField) {
  // Over Q(a), a*x - 1 is invertible-leading: x reduces to 1/a.
  const auto o = MonomialOrder::lex({X, Y});
  const auto G = buchberger({v(A) * v(X) - q(1), v(Y) - v(X) * v(X)}, o);
  ASSERT_EQ(G.generators.size(), 2u);
  EXPECT_EQ(G.generators[0], v(A) * v(X) - q(1));
  EXPECT_EQ(G.generators[1], v(A).pow(2) * v(Y) - q(1));
  EXPECT_FALSE(is_member(v(A), G));
}

TEST(Groebner, SPolynomialsReduceToZero) {
  const auto o = MonomialOrder::lex({T, X, Y});
  const std::vector<JetPoly> gens{v(T).pow(2) + v(X) * v(Y) * v(A) - q(1), v(T) * v(X) - v(Y) * v(B),
                                  v(X).pow(2) - v(T)};
  const auto G = buchberger(gens, o);
  for (std::size_t i = 0; i < G.generators.size(); ++i)
    for (std::size_t j = i + 1; j < G.generators.size(); ++j)
      EXPECT_TRUE(normal_form(s_polynomial(G.generators[i], G.generators[j], o), G).is_zero());
  for (const auto& g : gens) EXPECT_TRUE(is_member(g, G));
}

TEST(Groebner, OrderedPrinting) {
  const auto o = MonomialOrder({{X}, {Y}});
  const JetPoly p = v(B) * v(X) - v(C) * v(Y) - q(1);
  EXPECT_EQ(ordered_string(p, o), "(theta2)*x2+(-theta3)*x3-1");
}

TEST(Groebner, RingMismatch) {
  const auto o = MonomialOrder::lex({X});
  EXPECT_THROW(normal_form(v(Y), {v(X)}, o), RingMismatch);
}

TEST(Groebner, BudgetIsEnforced) {
  const auto o = MonomialOrder::lex({T, X, Y});
  GroebnerBudget tiny;
  tiny.max_pair_reductions = 1;
  const std::vector<JetPoly> gens{v(T).pow(2) - v(X), v(T) * v(X) - v(Y), v(X).pow(2) - v(T) * v(Y) + q(1)};
  EXPECT_THROW(buchberger(gens, o, tiny), ResourceBudgetExceeded);
}
