#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "obspinn/algebra/monomial_order.hpp"
#include "obspinn/algebra/poly.hpp"
#include "obspinn/algebra/poly_gcd.hpp"

namespace obspinn {

struct GroebnerBudget {
  std::size_t max_pair_reductions = 1'000'000;
  unsigned max_degree = 40;
};

struct GroebnerStats {
  std::size_t pairs_reduced = 0;
  std::size_t zero_reductions = 0;
};

/// Reduced Groebner basis over Q(θ). Generators are sorted by leading
/// monomial, greatest first, each scaled to integer coefficients in Z[θ]
/// with unit content and a positive leading sign.
struct GroebnerBasis {
  std::vector<JetPoly> generators;
  MonomialOrder order;
  GroebnerStats stats;

  bool is_unit() const { return generators.size() == 1 && generators.front().is_constant(); }
};

namespace gb {

constexpr std::size_t kMaxVars = 48;
using Exponents = std::array<std::uint8_t, kMaxVars>;

inline unsigned degree(const Exponents& e) {
  unsigned d = 0;
  for (auto v : e) d += v;
  return d;
}
inline bool divides(const Exponents& a, const Exponents& b) {
  for (std::size_t i = 0; i < kMaxVars; ++i)
    if (a[i] > b[i]) return false;
  return true;
}
inline bool coprime(const Exponents& a, const Exponents& b) {
  for (std::size_t i = 0; i < kMaxVars; ++i)
    if (a[i] && b[i]) return false;
  return true;
}
inline Exponents lcm(const Exponents& a, const Exponents& b) {
  Exponents r{};
  for (std::size_t i = 0; i < kMaxVars; ++i) r[i] = std::max(a[i], b[i]);
  return r;
}
inline Exponents add(const Exponents& a, const Exponents& b) {
  Exponents r{};
  for (std::size_t i = 0; i < kMaxVars; ++i) r[i] = static_cast<std::uint8_t>(a[i] + b[i]);
  return r;
}
inline Exponents sub(const Exponents& a, const Exponents& b) {
  Exponents r{};
  for (std::size_t i = 0; i < kMaxVars; ++i) r[i] = static_cast<std::uint8_t>(a[i] - b[i]);
  return r;
}

struct Term {
  Exponents e;
  JetPoly c;  // nonzero, parameters only
};

// Terms sorted by decreasing monomial order (lex on ranks).
using Poly = std::vector<Term>;

inline Poly from_jetpoly(const JetPoly& p, const MonomialOrder& o, unsigned max_degree) {
  if (o.size() > kMaxVars) throw ResourceBudgetExceeded("ring has too many variables");
  std::map<Exponents, JetPoly, std::greater<>> grouped;
  for (const auto& [m, c] : p.terms()) {
    Exponents e{};
    std::vector<Monomial::Factor> params;
    for (const auto& [s, k] : m.factors()) {
      if (s.is_param()) {
        params.emplace_back(s, k);
      } else {
        if (k > max_degree) throw ResourceBudgetExceeded("degree cap exceeded");
        e[static_cast<std::size_t>(o.rank(s))] = static_cast<std::uint8_t>(k);
      }
    }
    grouped[e].add_term(Monomial::from_factors(std::move(params)), c);
  }
  Poly out;
  for (auto& [e, c] : grouped)
    if (!c.is_zero()) out.push_back({e, std::move(c)});
  return out;
}

inline Monomial to_monomial(const Exponents& e, const MonomialOrder& o) {
  std::vector<Monomial::Factor> f;
  for (std::size_t r = 0; r < o.size(); ++r)
    if (e[r]) f.emplace_back(o.variable(r), e[r]);
  return Monomial::from_factors(std::move(f));
}

inline JetPoly to_jetpoly(const Poly& p, const MonomialOrder& o) {
  JetPoly out;
  for (const auto& t : p) out += t.c.mul_term(to_monomial(t.e, o), Rational(1));
  return out;
}

inline bool is_one(const JetPoly& c) { return c.is_constant() && c.constant_term() == 1; }

/// Divides out the Z[θ] content and fixes the sign of the leading coefficient.
inline void normalize(Poly& p) {
  if (p.empty()) return;
  JetPoly g = p.front().c;
  for (std::size_t k = 1; k < p.size() && !g.is_constant(); ++k) g = gcd(g, p[k].c);
  if (!g.is_constant())
    for (auto& t : p) t.c = exact_divide(t.c, g);
  Integer den_lcm = 1, num_gcd = 0;
  for (const auto& t : p)
    for (const auto& [m, c] : t.c.terms()) {
      mpz_lcm(den_lcm.get_mpz_t(), den_lcm.get_mpz_t(), c.get_den().get_mpz_t());
      mpz_gcd(num_gcd.get_mpz_t(), num_gcd.get_mpz_t(), c.get_num().get_mpz_t());
    }
  Rational factor(den_lcm, num_gcd);
  factor.canonicalize();
  if (detail::lex_leading_term(p.front().c).second < 0) factor = -factor;
  if (factor != 1)
    for (auto& t : p) t.c *= factor;
}

// a * x^sa * f[1:] - b * x^sb * g[1:]; the leading terms are assumed to cancel.
inline Poly combine_tails(const JetPoly& a, const Exponents& sa, const Poly& f, const JetPoly& b,
                          const Exponents& sb, const Poly& g) {
  Poly out;
  out.reserve(f.size() + g.size());
  const bool a_one = is_one(a), b_one = is_one(b);
  std::size_t i = 1, j = 1;
  while (i < f.size() || j < g.size()) {
    Exponents ef{}, eg{};
    if (i < f.size()) ef = add(f[i].e, sa);
    if (j < g.size()) eg = add(g[j].e, sb);
    if (j >= g.size() || (i < f.size() && ef > eg)) {
      out.push_back({ef, a_one ? f[i].c : a * f[i].c});
      ++i;
    } else if (i >= f.size() || eg > ef) {
      out.push_back({eg, b_one ? -g[j].c : -(b * g[j].c)});
      ++j;
    } else {
      JetPoly c = (a_one ? f[i].c : a * f[i].c) - (b_one ? g[j].c : b * g[j].c);
      if (!c.is_zero()) out.push_back({ef, std::move(c)});
      ++i, ++j;
    }
  }
  return out;
}

/// Fraction-free reduction of f by the polynomials in G. With `full` every
/// term is reduced, otherwise only the leading term. The result equals the
/// remainder over Q(θ) up to a nonzero factor in Q(θ).
inline Poly reduce(Poly f, const std::vector<const Poly*>& G, bool full) {
  Poly r;
  std::size_t steps = 0;
  while (!f.empty()) {
    const Poly* div = nullptr;
    for (const Poly* g : G)
      if (!g->empty() && divides(g->front().e, f.front().e)) {
        div = g;
        break;
      }
    if (!div) {
      if (!full) break;
      r.push_back(std::move(f.front()));
      f.erase(f.begin());
      continue;
    }
    const JetPoly& lg = div->front().c;
    const JetPoly& lf = f.front().c;
    JetPoly a = lg, b = lf;
    if (!lg.is_constant() && !lf.is_constant()) {
      const JetPoly d = gcd(lg, lf);
      if (!d.is_constant()) a = exact_divide(lg, d), b = exact_divide(lf, d);
    }
    if (lg.is_constant()) a = JetPoly(1), b = lf * Rational(1 / lg.constant_term());
    f = combine_tails(a, Exponents{}, f, b, sub(f.front().e, div->front().e), *div);
    if (!is_one(a))
      for (auto& t : r) t.c *= a;
    if (++steps % 8 == 0) {
      // Keep coefficient growth in check.
      Poly joined = r;
      joined.insert(joined.end(), f.begin(), f.end());
      if (!joined.empty()) {
        normalize(joined);
        r.assign(joined.begin(), joined.begin() + static_cast<std::ptrdiff_t>(r.size()));
        f.assign(joined.begin() + static_cast<std::ptrdiff_t>(r.size()), joined.end());
      }
    }
  }
  r.insert(r.end(), std::make_move_iterator(f.begin()), std::make_move_iterator(f.end()));
  normalize(r);
  return r;
}

inline Poly s_polynomial(const Poly& f, const Poly& g) {
  const Exponents l = lcm(f.front().e, g.front().e);
  const JetPoly& lf = f.front().c;
  const JetPoly& lg = g.front().c;
  JetPoly a = lg, b = lf;
  const JetPoly d = gcd(lg, lf);
  if (!d.is_constant()) a = exact_divide(lg, d), b = exact_divide(lf, d);
  Poly s = combine_tails(a, sub(l, f.front().e), f, b, sub(l, g.front().e), g);
  normalize(s);
  return s;
}

inline bool is_constant(const Poly& p) { return p.size() == 1 && degree(p.front().e) == 0; }

class Engine {
 public:
  Engine(const MonomialOrder& order, const GroebnerBudget& budget) : order_(order), budget_(budget) {}

  std::vector<Poly> run(std::vector<Poly> gens) {
    for (auto& g : gens) {
      if (g.empty()) continue;
      normalize(g);
      if (is_constant(g)) return unit();
      add(std::move(g));
    }
    while (!pairs_.empty()) {
      auto best = std::min_element(pairs_.begin(), pairs_.end(), [](const Pair& x, const Pair& y) {
        if (x.deg != y.deg) return x.deg < y.deg;
        if (x.lcm != y.lcm) return x.lcm < y.lcm;
        return std::make_pair(x.i, x.j) < std::make_pair(y.i, y.j);
      });
      const Pair p = *best;
      pairs_.erase(best);
      if (++stats_.pairs_reduced > budget_.max_pair_reductions)
        throw ResourceBudgetExceeded("pair reduction budget exhausted");
      Poly h = reduce(s_polynomial(polys_[p.i], polys_[p.j]), active_ptrs(), false);
      if (h.empty()) {
        ++stats_.zero_reductions;
        continue;
      }
      if (is_constant(h)) return unit();
      for (const auto& t : h)
        if (degree(t.e) > budget_.max_degree) throw ResourceBudgetExceeded("degree cap exceeded");
      add(std::move(h));
    }
    return interreduce();
  }

  const GroebnerStats& stats() const { return stats_; }

 private:
  struct Pair {
    std::size_t i, j;
    Exponents lcm;
    unsigned deg;
  };

  const Exponents& lm(std::size_t k) const { return polys_[k].front().e; }

  std::vector<Poly> unit() const {
    Poly one{{Exponents{}, JetPoly(1)}};
    return {one};
  }

  std::vector<const Poly*> active_ptrs() const {
    std::vector<const Poly*> out;
    for (auto k : active_) out.push_back(&polys_[k]);
    return out;
  }

  // Gebauer-Moeller installation of a new basis element.
  void add(Poly h_poly) {
    const std::size_t h = polys_.size();
    polys_.push_back(std::move(h_poly));
    const Exponents& lh = lm(h);

    std::vector<Pair> C, D;
    for (auto g : active_) {
      const Exponents l = lcm(lm(g), lh);
      C.push_back({g, h, l, degree(l)});
    }
    while (!C.empty()) {
      const Pair p = C.front();
      C.erase(C.begin());
      bool keep = coprime(lm(p.i), lh);
      if (!keep) {
        keep = true;
        for (const auto& q : C)
          if (divides(q.lcm, p.lcm)) keep = false;
        for (const auto& q : D)
          if (divides(q.lcm, p.lcm)) keep = false;
      }
      if (keep) D.push_back(p);
    }
    std::vector<Pair> next;
    for (const auto& p : pairs_) {
      const bool drop = divides(lh, p.lcm) && lcm(lm(p.i), lh) != p.lcm && lcm(lm(p.j), lh) != p.lcm;
      if (!drop) next.push_back(p);
    }
    for (const auto& p : D)
      if (!coprime(lm(p.i), lh)) next.push_back(p);
    pairs_ = std::move(next);

    std::vector<std::size_t> kept;
    for (auto g : active_)
      if (!divides(lh, lm(g))) kept.push_back(g);
    kept.push_back(h);
    active_ = std::move(kept);
  }

  std::vector<Poly> interreduce() {
    std::vector<Poly> basis;
    // Input generators are installed unreduced, so drop non-minimal leads first.
    for (std::size_t a = 0; a < active_.size(); ++a) {
      bool minimal = true;
      for (std::size_t b = 0; b < active_.size() && minimal; ++b) {
        if (a == b) continue;
        const auto& la = lm(active_[a]);
        const auto& lb = lm(active_[b]);
        if (divides(lb, la) && (lb != la || b < a)) minimal = false;
      }
      if (minimal) basis.push_back(polys_[active_[a]]);
    }
    std::sort(basis.begin(), basis.end(), [](const Poly& a, const Poly& b) { return a.front().e < b.front().e; });
    for (std::size_t k = 0; k < basis.size(); ++k) {
      std::vector<const Poly*> others;
      for (std::size_t m = 0; m < basis.size(); ++m)
        if (m != k) others.push_back(&basis[m]);
      basis[k] = reduce(basis[k], others, true);
    }
    std::sort(basis.begin(), basis.end(), [](const Poly& a, const Poly& b) { return a.front().e > b.front().e; });
    return basis;
  }

  const MonomialOrder& order_;
  GroebnerBudget budget_;
  GroebnerStats stats_;
  std::vector<Poly> polys_;
  std::vector<std::size_t> active_;
  std::vector<Pair> pairs_;
};

inline std::vector<Poly> convert_all(const std::vector<JetPoly>& ps, const MonomialOrder& o, unsigned max_degree) {
  std::vector<Poly> out;
  out.reserve(ps.size());
  for (const auto& p : ps) out.push_back(from_jetpoly(p, o, max_degree));
  return out;
}

}  // namespace gb

/// Leading monomial (jet part only) and its Q[θ] coefficient.
inline std::pair<Monomial, JetPoly> leading_term(const JetPoly& p, const MonomialOrder& o) {
  if (p.is_zero()) throw Error("leading term of the zero polynomial");
  const auto g = gb::from_jetpoly(p, o, 255);
  return {gb::to_monomial(g.front().e, o), g.front().c};
}

/// Scales p to the basis normalization convention (Z[θ]-primitive, positive
/// leading sign under `o`).
inline JetPoly normalize_poly(const JetPoly& p, const MonomialOrder& o) {
  auto g = gb::from_jetpoly(p, o, 255);
  gb::normalize(g);
  return gb::to_jetpoly(g, o);
}

/// Remainder of p modulo G over Q(θ), returned in normalized form (it agrees
/// with the field remainder up to a nonzero factor in Q(θ)). Zero iff the
/// field remainder is zero.
inline JetPoly normal_form(const JetPoly& p, const std::vector<JetPoly>& G, const MonomialOrder& o) {
  const auto polys = gb::convert_all(G, o, 255);
  std::vector<const gb::Poly*> ptrs;
  for (const auto& g : polys)
    if (!g.empty()) ptrs.push_back(&g);
  return gb::to_jetpoly(gb::reduce(gb::from_jetpoly(p, o, 255), ptrs, true), o);
}

inline JetPoly s_polynomial(const JetPoly& f, const JetPoly& g, const MonomialOrder& o) {
  return gb::to_jetpoly(gb::s_polynomial(gb::from_jetpoly(f, o, 255), gb::from_jetpoly(g, o, 255)), o);
}

inline GroebnerBasis buchberger(const std::vector<JetPoly>& gens, const MonomialOrder& o,
                                const GroebnerBudget& budget = {}) {
  if (gens.empty()) throw Error("buchberger needs at least one generator");
  gb::Engine engine(o, budget);
  const auto basis = engine.run(gb::convert_all(gens, o, budget.max_degree));
  GroebnerBasis out;
  out.order = o;
  out.stats = engine.stats();
  for (const auto& g : basis) out.generators.push_back(gb::to_jetpoly(g, o));
  return out;
}

inline JetPoly normal_form(const JetPoly& p, const GroebnerBasis& G) {
  return normal_form(p, G.generators, G.order);
}

inline bool is_member(const JetPoly& p, const GroebnerBasis& G) { return normal_form(p, G).is_zero(); }

namespace detail {

inline std::string repeated_factors(const std::vector<std::pair<Symbol, unsigned>>& factors, const SymbolNamer& namer) {
  std::string out;
  for (const auto& [s, e] : factors)
    for (unsigned k = 0; k < e; ++k) out += (out.empty() ? "" : "*") + namer(s);
  return out;
}

// Parameter polynomial with terms by decreasing degree, then lex with
// theta1 > theta2 > ..., and no spaces.
inline std::string param_coefficient_string(const JetPoly& c, const SymbolNamer& namer) {
  std::vector<std::pair<Monomial, Rational>> terms(c.terms().begin(), c.terms().end());
  auto exponents = [](const Monomial& m) {
    std::vector<std::pair<int, unsigned>> v;
    for (const auto& [s, e] : m.factors()) v.emplace_back(s.index, e);
    std::sort(v.begin(), v.end());
    return v;
  };
  std::stable_sort(terms.begin(), terms.end(), [&](const auto& a, const auto& b) {
    const auto da = a.first.total_degree(), db = b.first.total_degree();
    if (da != db) return da > db;
    const auto ea = exponents(a.first), eb = exponents(b.first);
    for (std::size_t k = 0; k < std::min(ea.size(), eb.size()); ++k) {
      if (ea[k].first != eb[k].first) return ea[k].first < eb[k].first;
      if (ea[k].second != eb[k].second) return ea[k].second > eb[k].second;
    }
    return ea.size() > eb.size();
  });
  std::string out;
  for (std::size_t k = 0; k < terms.size(); ++k) {
    const auto& [m, c0] = terms[k];
    const bool negative = c0 < 0;
    if (negative) out += "-";
    else if (k > 0) out += "+";
    const Rational mag = abs(c0);
    std::vector<std::pair<Symbol, unsigned>> f;
    for (const auto& [s, e] : m.factors()) f.emplace_back(s, e);
    std::sort(f.begin(), f.end(), [](const auto& a, const auto& b) { return a.first.index < b.first.index; });
    if (m.is_one()) out += rational_to_string(mag);
    else out += (mag == 1 ? "" : rational_to_string(mag) + "*") + repeated_factors(f, namer);
  }
  return out;
}

}  // namespace detail

/// Prints p with terms in decreasing monomial order, variables in ring order,
/// powers written as repeated factors and parenthesized Q[θ] coefficients,
/// e.g. "(theta2)*x2+(-theta3)*y-d1y".
inline std::string ordered_string(const JetPoly& p, const MonomialOrder& o,
                                  const SymbolNamer& namer = default_symbol_name) {
  if (p.is_zero()) return "0";
  const auto g = gb::from_jetpoly(p, o, 255);
  std::string out;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const auto& t = g[k];
    std::vector<std::pair<Symbol, unsigned>> factors;
    for (std::size_t r = 0; r < o.size(); ++r)
      if (t.e[r] > 0) factors.emplace_back(o.variable(r), t.e[r]);
    const std::string mono = detail::repeated_factors(factors, namer);
    std::string coef;
    bool negative = false;
    if (t.c.is_constant()) {
      const Rational c = t.c.constant_term();
      negative = c < 0;
      if (abs(c) != 1 || mono.empty()) coef = rational_to_string(abs(c));
    } else {
      coef = "(" + detail::param_coefficient_string(t.c, namer) + ")";
    }
    if (k > 0) out += negative ? "-" : "+";
    else if (negative) out += "-";
    out += coef;
    if (!mono.empty()) out += (coef.empty() ? "" : "*") + mono;
  }
  return out;
}

/// One generator per line in basis order.
inline std::string dump(const GroebnerBasis& G, const SymbolNamer& namer = default_symbol_name) {
  std::string out;
  for (std::size_t k = 0; k < G.generators.size(); ++k) {
    out += ordered_string(G.generators[k], G.order, namer);
    out += k + 1 < G.generators.size() ? ",\n" : "\n";
  }
  return out;
}

}  // namespace obspinn
