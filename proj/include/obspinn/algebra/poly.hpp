#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cstdint>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "obspinn/algebra/symbol.hpp"
#include "obspinn/error.hpp"

namespace obspinn {

using Rational = mpq_class;
using Integer = mpz_class;

inline Rational make_rational(long num, long den = 1) {
  Rational r(num, den);
  r.canonicalize();
  return r;
}

/// Power product of symbols, kept sorted by symbol with positive exponents.
class Monomial {
 public:
  using Factor = std::pair<Symbol, std::uint32_t>;

  Monomial() = default;
  explicit Monomial(Symbol s, std::uint32_t e = 1) {
    if (e > 0) factors_.emplace_back(s, e);
  }
  static Monomial from_factors(std::vector<Factor> f) {
    std::sort(f.begin(), f.end(), [](const Factor& a, const Factor& b) { return a.first < b.first; });
    Monomial m;
    for (const auto& [s, e] : f) {
      if (e == 0) continue;
      if (!m.factors_.empty() && m.factors_.back().first == s)
        m.factors_.back().second += e;
      else
        m.factors_.emplace_back(s, e);
    }
    return m;
  }

  const std::vector<Factor>& factors() const { return factors_; }
  bool is_one() const { return factors_.empty(); }

  std::uint32_t degree(Symbol s) const {
    for (const auto& [t, e] : factors_)
      if (t == s) return e;
    return 0;
  }
  std::uint32_t total_degree() const {
    std::uint32_t d = 0;
    for (const auto& f : factors_) d += f.second;
    return d;
  }

  Monomial operator*(const Monomial& o) const {
    Monomial r;
    r.factors_.reserve(factors_.size() + o.factors_.size());
    auto a = factors_.begin(), b = o.factors_.begin();
    while (a != factors_.end() || b != o.factors_.end()) {
      if (b == o.factors_.end() || (a != factors_.end() && a->first < b->first)) {
        r.factors_.push_back(*a++);
      } else if (a == factors_.end() || b->first < a->first) {
        r.factors_.push_back(*b++);
      } else {
        r.factors_.emplace_back(a->first, a->second + b->second);
        ++a, ++b;
      }
    }
    return r;
  }

  bool divides(const Monomial& o) const {
    auto b = o.factors_.begin();
    for (const auto& [s, e] : factors_) {
      while (b != o.factors_.end() && b->first < s) ++b;
      if (b == o.factors_.end() || b->first != s || b->second < e) return false;
    }
    return true;
  }

  /// this / o; requires o.divides(*this).
  Monomial operator/(const Monomial& o) const {
    Monomial r;
    auto b = o.factors_.begin();
    for (const auto& [s, e] : factors_) {
      std::uint32_t sub = 0;
      if (b != o.factors_.end() && b->first == s) sub = (b++)->second;
      if (e > sub) r.factors_.emplace_back(s, e - sub);
    }
    return r;
  }

  /// Copy with symbol `s` removed.
  Monomial without(Symbol s) const {
    Monomial r;
    for (const auto& f : factors_)
      if (f.first != s) r.factors_.push_back(f);
    return r;
  }

  friend bool operator==(const Monomial&, const Monomial&) = default;
  friend bool operator<(const Monomial& a, const Monomial& b) { return a.factors_ < b.factors_; }

 private:
  std::vector<Factor> factors_;
};

/// Sparse multivariate polynomial with rational coefficients over parameter
/// symbols and jet variables. Zero coefficients are never stored.
class JetPoly {
 public:
  using TermMap = std::map<Monomial, Rational>;

  JetPoly() = default;
  JetPoly(long c) {  // NOLINT(google-explicit-constructor)
    if (c != 0) terms_.emplace(Monomial{}, Rational(c));
  }
  JetPoly(const Rational& c) {  // NOLINT(google-explicit-constructor)
    if (c != 0) terms_.emplace(Monomial{}, c);
  }
  explicit JetPoly(Symbol s) { terms_.emplace(Monomial(s), Rational(1)); }
  JetPoly(const Monomial& m, const Rational& c) {
    if (c != 0) terms_.emplace(m, c);
  }

  static JetPoly var(Symbol s) { return JetPoly(s); }

  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const { return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.is_one()); }
  Rational constant_term() const {
    auto it = terms_.find(Monomial{});
    return it == terms_.end() ? Rational(0) : it->second;
  }
  std::size_t size() const { return terms_.size(); }

  void add_term(const Monomial& m, const Rational& c) {
    if (c == 0) return;
    auto [it, inserted] = terms_.try_emplace(m, c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0) terms_.erase(it);
    }
  }

  JetPoly& operator+=(const JetPoly& o) {
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
  }
  JetPoly& operator-=(const JetPoly& o) {
    for (const auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
  }
  JetPoly& operator*=(const Rational& c) {
    if (c == 0) {
      terms_.clear();
      return *this;
    }
    for (auto& t : terms_) t.second *= c;
    return *this;
  }
  friend JetPoly operator+(JetPoly a, const JetPoly& b) { return a += b; }
  friend JetPoly operator-(JetPoly a, const JetPoly& b) { return a -= b; }
  friend JetPoly operator-(JetPoly a) {
    for (auto& t : a.terms_) t.second = -t.second;
    return a;
  }
  friend JetPoly operator*(JetPoly a, const Rational& c) { return a *= c; }
  friend JetPoly operator*(const Rational& c, JetPoly a) { return a *= c; }
  friend JetPoly operator*(const JetPoly& a, const JetPoly& b) {
    JetPoly r;
    for (const auto& [ma, ca] : a.terms_)
      for (const auto& [mb, cb] : b.terms_) r.add_term(ma * mb, ca * cb);
    return r;
  }
  JetPoly& operator*=(const JetPoly& o) { return *this = *this * o; }

  JetPoly mul_term(const Monomial& m, const Rational& c) const {
    JetPoly r;
    if (c == 0) return r;
    for (const auto& [mm, cc] : terms_) r.terms_.emplace(mm * m, cc * c);
    return r;
  }

  JetPoly pow(unsigned n) const {
    JetPoly result(1), base = *this;
    while (n > 0) {
      if (n & 1u) result *= base;
      n >>= 1u;
      if (n > 0) base *= base;
    }
    return result;
  }

  friend bool operator==(const JetPoly&, const JetPoly&) = default;

  std::set<Symbol> symbols() const {
    std::set<Symbol> s;
    for (const auto& [m, c] : terms_)
      for (const auto& f : m.factors()) s.insert(f.first);
    return s;
  }
  bool contains(Symbol s) const {
    for (const auto& [m, c] : terms_)
      if (m.degree(s) > 0) return true;
    return false;
  }
  template <class Pred>
  bool any_symbol(Pred&& pred) const {
    for (const auto& [m, c] : terms_)
      for (const auto& f : m.factors())
        if (pred(f.first)) return true;
    return false;
  }

  std::uint32_t degree(Symbol s) const {
    std::uint32_t d = 0;
    for (const auto& [m, c] : terms_) d = std::max(d, m.degree(s));
    return d;
  }
  std::uint32_t total_degree() const {
    std::uint32_t d = 0;
    for (const auto& [m, c] : terms_) d = std::max(d, m.total_degree());
    return d;
  }

  /// Coefficient of s^k when viewed as a polynomial in s.
  JetPoly coefficient(Symbol s, std::uint32_t k) const {
    JetPoly r;
    for (const auto& [m, c] : terms_)
      if (m.degree(s) == k) r.terms_.emplace(m.without(s), c);
    return r;
  }

  /// Formal partial derivative with respect to `s`.
  JetPoly partial(Symbol s) const {
    JetPoly r;
    for (const auto& [m, c] : terms_) {
      const auto e = m.degree(s);
      if (e == 0) continue;
      r.add_term(m / Monomial(s), c * e);
    }
    return r;
  }

  /// Simultaneous substitution of symbols by polynomials.
  JetPoly substitute(const std::map<Symbol, JetPoly>& rules) const {
    JetPoly r;
    std::map<std::pair<Symbol, std::uint32_t>, JetPoly> power_cache;
    for (const auto& [m, c] : terms_) {
      JetPoly term(Monomial{}, c);
      std::vector<Monomial::Factor> kept;
      for (const auto& [s, e] : m.factors()) {
        auto it = rules.find(s);
        if (it == rules.end()) {
          kept.emplace_back(s, e);
          continue;
        }
        auto key = std::make_pair(s, e);
        auto pc = power_cache.find(key);
        if (pc == power_cache.end()) pc = power_cache.emplace(key, it->second.pow(e)).first;
        term *= pc->second;
      }
      if (!kept.empty()) term = term.mul_term(Monomial::from_factors(kept), Rational(1));
      r += term;
    }
    return r;
  }

  /// Numeric evaluation; `value_of(Symbol)` supplies every symbol present.
  template <class T, class F>
  T evaluate(F&& value_of) const {
    T sum{};
    for (const auto& [m, c] : terms_) {
      T term = T(c.get_d());
      for (const auto& [s, e] : m.factors()) {
        const T v = value_of(s);
        for (std::uint32_t k = 0; k < e; ++k) term = term * v;
      }
      sum = sum + term;
    }
    return sum;
  }

  /// Largest absolute coefficient (0 for the zero polynomial).
  Rational max_abs_coefficient() const {
    Rational best(0);
    for (const auto& [m, c] : terms_) best = std::max(best, Rational(abs(c)));
    return best;
  }

  std::string to_string(const SymbolNamer& namer = default_symbol_name) const;

 private:
  TermMap terms_;
};

inline std::string rational_to_string(const Rational& c) {
  return c.get_den() == 1 ? c.get_num().get_str() : c.get_num().get_str() + "/" + c.get_den().get_str();
}

inline std::string monomial_to_string(const Monomial& m, const SymbolNamer& namer) {
  std::string out;
  for (const auto& [s, e] : m.factors()) {
    if (!out.empty()) out += "*";
    out += namer(s);
    if (e > 1) out += "^" + std::to_string(e);
  }
  return out;
}

/// Display order: higher total degree first, then the reverse of the
/// canonical monomial order. Deterministic for a given polynomial.
inline std::vector<std::pair<Monomial, Rational>> display_terms(const JetPoly& p) {
  std::vector<std::pair<Monomial, Rational>> terms(p.terms().begin(), p.terms().end());
  std::stable_sort(terms.begin(), terms.end(), [](const auto& a, const auto& b) {
    const auto da = a.first.total_degree(), db = b.first.total_degree();
    if (da != db) return da > db;
    return b.first < a.first;
  });
  return terms;
}

inline std::string JetPoly::to_string(const SymbolNamer& namer) const {
  if (terms_.empty()) return "0";
  std::string out;
  bool first = true;
  for (const auto& [m, c] : display_terms(*this)) {
    const bool negative = c < 0;
    const Rational mag = abs(c);
    if (first) {
      if (negative) out += "-";
    } else {
      out += negative ? " - " : " + ";
    }
    first = false;
    if (m.is_one()) {
      out += rational_to_string(mag);
    } else if (mag == 1) {
      out += monomial_to_string(m, namer);
    } else {
      out += rational_to_string(mag) + "*" + monomial_to_string(m, namer);
    }
  }
  return out;
}

inline std::ostream& operator<<(std::ostream& os, const JetPoly& p) { return os << p.to_string(); }

}  // namespace obspinn
