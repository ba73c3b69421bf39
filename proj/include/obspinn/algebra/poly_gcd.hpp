#pragma once

#include <utility>
#include <vector>

#include "obspinn/algebra/poly.hpp"

namespace obspinn {

namespace detail {

// Lex comparison with the largest symbol most significant. Only used to pick
// leading terms for exact division and sign normalization of Q[θ] polynomials.
inline int lex_compare(const Monomial& a, const Monomial& b) {
  const auto& fa = a.factors();
  const auto& fb = b.factors();
  auto i = static_cast<std::ptrdiff_t>(fa.size()) - 1;
  auto j = static_cast<std::ptrdiff_t>(fb.size()) - 1;
  while (i >= 0 && j >= 0) {
    if (fa[i].first != fb[j].first) return fa[i].first > fb[j].first ? 1 : -1;
    if (fa[i].second != fb[j].second) return fa[i].second > fb[j].second ? 1 : -1;
    --i, --j;
  }
  if (i >= 0) return 1;
  if (j >= 0) return -1;
  return 0;
}

inline std::pair<Monomial, Rational> lex_leading_term(const JetPoly& p) {
  auto best = p.terms().begin();
  for (auto it = p.terms().begin(); it != p.terms().end(); ++it)
    if (lex_compare(it->first, best->first) > 0) best = it;
  return *best;
}

inline Symbol max_symbol(const JetPoly& a, const JetPoly& b) {
  Symbol best{};
  bool found = false;
  for (const auto* p : {&a, &b})
    for (const auto& [m, c] : p->terms())
      if (!m.factors().empty()) {
        const Symbol s = m.factors().back().first;
        if (!found || best < s) best = s, found = true;
      }
  return best;
}

inline std::vector<JetPoly> coefficients_in(const JetPoly& p, Symbol v) {
  std::vector<JetPoly> out(p.degree(v) + 1);
  for (const auto& [m, c] : p.terms()) out[m.degree(v)].add_term(m.without(v), c);
  return out;
}

}  // namespace detail

/// Returns q with a == q * b. Throws InexactDivision when b does not divide a.
inline JetPoly exact_divide(const JetPoly& a, const JetPoly& b) {
  if (b.is_zero()) throw InexactDivision("division by the zero polynomial");
  if (b.is_constant()) return a * Rational(1 / b.constant_term());
  const auto [bm, bc] = detail::lex_leading_term(b);
  JetPoly q, r = a;
  while (!r.is_zero()) {
    const auto [rm, rc] = detail::lex_leading_term(r);
    if (!bm.divides(rm)) throw InexactDivision("polynomial division is not exact");
    const Monomial tm = rm / bm;
    const Rational tc = rc / bc;
    q.add_term(tm, tc);
    r -= b.mul_term(tm, tc);
  }
  return q;
}

/// Scales p to integer coefficients with unit content and a positive leading
/// coefficient. Returns {factor, result} with result == factor * p.
inline std::pair<Rational, JetPoly> integer_primitive(const JetPoly& p) {
  if (p.is_zero()) return {Rational(1), p};
  Integer den_lcm = 1, num_gcd = 0;
  for (const auto& [m, c] : p.terms()) {
    mpz_lcm(den_lcm.get_mpz_t(), den_lcm.get_mpz_t(), c.get_den().get_mpz_t());
    mpz_gcd(num_gcd.get_mpz_t(), num_gcd.get_mpz_t(), c.get_num().get_mpz_t());
  }
  Rational factor(den_lcm, num_gcd);
  factor.canonicalize();
  if (detail::lex_leading_term(p).second < 0) factor = -factor;
  return {factor, p * factor};
}

inline JetPoly gcd(const JetPoly& a, const JetPoly& b);

/// Content of p viewed as a univariate polynomial in v.
inline JetPoly content_in(const JetPoly& p, Symbol v) {
  JetPoly g;
  for (const auto& c : detail::coefficients_in(p, v)) {
    if (c.is_zero()) continue;
    g = gcd(g, c);
    if (g.is_constant()) return JetPoly(1);
  }
  return g;
}

namespace detail {

inline JetPoly pseudo_remainder(JetPoly a, const JetPoly& b, Symbol v) {
  const auto n = b.degree(v);
  const JetPoly lc_b = b.coefficient(v, n);
  while (!a.is_zero() && a.degree(v) >= n) {
    const auto da = a.degree(v);
    const JetPoly lead = a.coefficient(v, da) * JetPoly(Monomial(v, da - n), Rational(1));
    a = lc_b * a - lead * b;
  }
  return a;
}

inline JetPoly primitive_part_in(const JetPoly& p, Symbol v) {
  if (p.is_zero()) return p;
  return exact_divide(p, content_in(p, v));
}

}  // namespace detail

/// Greatest common divisor over Q, normalized by integer_primitive. Recursive
/// primitive polynomial remainder sequence; intended for the small parameter
/// polynomials that appear as coefficients.
inline JetPoly gcd(const JetPoly& a, const JetPoly& b) {
  if (a.is_zero()) return integer_primitive(b).second;
  if (b.is_zero()) return integer_primitive(a).second;
  if (a.is_constant() || b.is_constant()) return JetPoly(1);
  if (a.size() == 1 && b.size() == 1) {
    // Monomial gcd.
    const auto& ma = a.terms().begin()->first;
    const auto& mb = b.terms().begin()->first;
    std::vector<Monomial::Factor> f;
    for (const auto& [s, e] : ma.factors()) {
      const auto eb = mb.degree(s);
      if (eb > 0) f.emplace_back(s, std::min(e, eb));
    }
    return JetPoly(Monomial::from_factors(std::move(f)), Rational(1));
  }
  const Symbol v = detail::max_symbol(a, b);
  if (!a.contains(v)) return gcd(a, content_in(b, v));
  if (!b.contains(v)) return gcd(content_in(a, v), b);

  const JetPoly ca = content_in(a, v), cb = content_in(b, v);
  JetPoly pa = exact_divide(a, ca), pb = exact_divide(b, cb);
  const JetPoly c = gcd(ca, cb);
  if (pa.degree(v) < pb.degree(v)) std::swap(pa, pb);
  while (!pb.is_zero()) {
    JetPoly r = detail::pseudo_remainder(pa, pb, v);
    pa = std::move(pb);
    // Over Q the content of a univariate remainder is 1, so the integer
    // content has to be stripped separately.
    pb = integer_primitive(detail::primitive_part_in(r, v)).second;
  }
  return integer_primitive(c * detail::primitive_part_in(pa, v)).second;
}

}  // namespace obspinn
