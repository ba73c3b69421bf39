#pragma once

#include <cctype>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "obspinn/model/model.hpp"

namespace obspinn {

namespace detail {

inline bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
inline bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

/// Parses an exact decimal such as 0.26, 5, 1.5e-3 into a rational.
inline Rational parse_decimal(std::string_view text) {
  std::string digits;
  long exp10 = 0;
  std::size_t k = 0;
  bool seen_point = false;
  for (; k < text.size(); ++k) {
    const char c = text[k];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digits += c;
      if (seen_point) --exp10;
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else {
      break;
    }
  }
  if (k < text.size() && (text[k] == 'e' || text[k] == 'E')) exp10 += std::stol(std::string(text.substr(k + 1)));
  Rational r{Integer(digits.empty() ? "0" : digits, 10)};
  Integer scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(exp10 < 0 ? -exp10 : exp10));
  if (exp10 < 0) r /= scale;
  else r *= scale;
  r.canonicalize();
  return r;
}

/// Recursive-descent parser for polynomial expressions.
///   expr  := ['+'|'-'] term (('+'|'-') term)*
///   term  := power (('*'|'/') power)*
///   power := atom ['^' integer]
///   atom  := number | identifier | '(' expr ')' | ('+'|'-') power
class ExprParser {
 public:
  using Resolver = std::function<std::optional<Symbol>(const std::string&)>;

  ExprParser(std::string_view text, std::size_t line, std::size_t col0, Resolver resolve)
      : s_(text), line_(line), col0_(col0), resolve_(std::move(resolve)) {}

  JetPoly parse() {
    skip_ws();
    if (pos_ >= s_.size()) fail("expected an expression");
    JetPoly p = expr();
    skip_ws();
    if (pos_ < s_.size()) fail(std::string("unexpected '") + s_[pos_] + "'");
    return p;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw SyntaxError(msg, line_, col0_ + pos_); }
  std::string where() const {
    return "line " + std::to_string(line_) + ", column " + std::to_string(col0_ + pos_) + ": ";
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  JetPoly expr() {
    JetPoly acc = term();
    for (;;) {
      if (accept('+')) acc += term();
      else if (accept('-')) acc -= term();
      else return acc;
    }
  }

  JetPoly term() {
    JetPoly acc = power();
    for (;;) {
      if (accept('*')) {
        acc *= power();
      } else if (accept('/')) {
        const std::size_t at = pos_;
        const JetPoly d = power();
        if (!d.is_constant()) {
          pos_ = at;
          throw NonPolynomialTerm(where() + "division by a non-constant expression");
        }
        if (d.is_zero()) {
          pos_ = at;
          fail("division by zero");
        }
        acc *= Rational(1 / d.constant_term());
      } else {
        return acc;
      }
    }
  }

  JetPoly power() {
    skip_ws();
    if (accept('-')) return -power();
    if (accept('+')) return power();
    JetPoly base = atom();
    if (accept('^')) {
      skip_ws();
      const std::size_t start = pos_;
      if (pos_ < s_.size() && s_[pos_] == '-') throw NonPolynomialTerm(where() + "negative exponent");
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (start == pos_) fail("expected a non-negative integer exponent");
      const unsigned long e = std::stoul(std::string(s_.substr(start, pos_ - start)));
      if (e > 64) fail("exponent too large");
      base = base.pow(static_cast<unsigned>(e));
    }
    return base;
  }

  JetPoly atom() {
    skip_ws();
    if (pos_ >= s_.size()) fail("unexpected end of expression");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      JetPoly inner = expr();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) ++pos_;
      if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
        std::size_t k = pos_ + 1;
        if (k < s_.size() && (s_[k] == '+' || s_[k] == '-')) ++k;
        if (k < s_.size() && std::isdigit(static_cast<unsigned char>(s_[k]))) {
          pos_ = k;
          while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        }
      }
      const auto text = s_.substr(start, pos_ - start);
      if (text.find('.') != text.rfind('.') || text == ".") {
        pos_ = start;
        fail("malformed number");
      }
      return JetPoly(parse_decimal(text));
    }
    if (is_ident_start(c)) {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && is_ident_char(s_[pos_])) ++pos_;
      const std::string name(s_.substr(start, pos_ - start));
      auto sym = resolve_(name);
      if (!sym) {
        pos_ = start;
        throw UndeclaredSymbol(where() + "undeclared symbol '" + name + "'");
      }
      return JetPoly(*sym);
    }
    fail(std::string("unexpected '") + c + "'");
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  std::size_t line_, col0_;
  Resolver resolve_;
};

inline std::optional<Symbol> resolve_plain(const ModelSpec& m, const std::string& name) {
  if (auto i = m.state_index(name)) return Symbol::state(static_cast<int>(*i));
  if (auto i = m.param_index(name)) return Symbol::param(static_cast<int>(*i));
  if (auto i = m.input_index(name)) return Symbol::input(static_cast<int>(*i));
  return std::nullopt;
}

// Accepts plain names plus jets d<k><name> and outputs y<m>, d<k>y<m>.
inline std::optional<Symbol> resolve_jet(const ModelSpec& m, const std::string& name) {
  if (auto s = resolve_plain(m, name)) return s;
  std::string base = name;
  int order = 0;
  if (name.size() > 1 && name[0] == 'd' && std::isdigit(static_cast<unsigned char>(name[1]))) {
    std::size_t k = 1;
    while (k < name.size() && std::isdigit(static_cast<unsigned char>(name[k]))) ++k;
    order = std::stoi(name.substr(1, k - 1));
    base = name.substr(k);
  }
  if (auto s = resolve_plain(m, base); s && !s->is_param()) {
    s->order = static_cast<std::uint16_t>(order);
    return s;
  }
  if (base.size() > 1 && base[0] == 'y' &&
      std::all_of(base.begin() + 1, base.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
    const int idx = std::stoi(base.substr(1));
    if (idx >= 1 && static_cast<std::size_t>(idx) <= m.num_outputs()) return Symbol::output(idx - 1, order);
  }
  return std::nullopt;
}

}  // namespace detail

/// Parses an expression over the model's symbols. With `jets` the names
/// d<k><state>, y<m> and d<k>y<m> are accepted as jet variables.
inline JetPoly parse_expression(std::string_view text, const ModelSpec& m, bool jets = true) {
  detail::ExprParser p(text, 1, 1, [&](const std::string& n) {
    return jets ? detail::resolve_jet(m, n) : detail::resolve_plain(m, n);
  });
  return p.parse();
}

/// Parses the model DSL:
///
///   states: S, E, I, R
///   params: beta, epsilon, gamma
///   inputs: u
///   dynamics:
///     d/dt S = -beta*S*I
///   measure:
///     y1 = I
///   reduce:
///     R = 1 - (S + E + I)
///
/// `#` starts a comment. Numbers are exact decimals.
inline ModelSpec parse_model(std::string_view text) {
  using detail::trim;
  ModelSpec m;
  enum class Block { none, dynamics, measure, reduce };
  Block block = Block::none;
  std::size_t block_line = 0, block_col = 0, block_entries = 0;
  bool seen_states = false, seen_dynamics = false, seen_measure = false;
  std::vector<std::optional<JetPoly>> dynamics;
  struct Pending {
    std::string lhs;
    std::string rhs;
    std::size_t line, lhs_col, rhs_col;
  };
  std::vector<Pending> dyn_lines, measure_lines, reduce_lines;

  auto close_block = [&]() {
    if ((block == Block::dynamics || block == Block::measure) && block_entries == 0)
      throw SyntaxError(std::string("empty ") + (block == Block::dynamics ? "dynamics" : "measure") + " block",
                        block_line, block_col);
  };

  auto parse_names = [](std::string_view rest, std::size_t line, std::size_t col) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= rest.size()) {
      auto comma = rest.find(',', pos);
      if (comma == std::string_view::npos) comma = rest.size();
      const auto item = trim(rest.substr(pos, comma - pos));
      if (item.empty()) {
        if (comma == rest.size() && out.empty()) break;
        throw SyntaxError("empty name in list", line, col + pos);
      }
      if (!detail::is_ident_start(item.front()) ||
          !std::all_of(item.begin(), item.end(), [](char c) { return detail::is_ident_char(c); }))
        throw SyntaxError("invalid name '" + std::string(item) + "'", line, col + pos);
      out.emplace_back(item);
      pos = comma + 1;
    }
    return out;
  };

  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view raw = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    const auto content = trim(raw);
    if (content.empty()) {
      if (end == text.size()) break;
      continue;
    }
    const std::size_t col = static_cast<std::size_t>(content.data() - raw.data()) + 1;

    // Block header?
    std::size_t k = 0;
    while (k < content.size() && detail::is_ident_char(content[k])) ++k;
    std::size_t after = k;
    while (after < content.size() && content[after] == ' ') ++after;
    if (k > 0 && after < content.size() && content[after] == ':') {
      const std::string head(content.substr(0, k));
      const auto rest = content.substr(after + 1);
      const std::size_t rest_col = col + after + 1;
      if (head == "states" || head == "params" || head == "inputs") {
        close_block();
        block = Block::none;
        auto names = parse_names(rest, line_no, rest_col);
        auto& target = head == "states" ? m.state_names : head == "params" ? m.param_names : m.input_names;
        if (!target.empty()) throw SyntaxError("duplicate '" + head + "' block", line_no, col);
        target = std::move(names);
        if (head == "states") seen_states = true;
        if (end == text.size()) break;
        continue;
      }
      if (head == "dynamics" || head == "measure" || head == "reduce") {
        close_block();
        if (!trim(rest).empty()) throw SyntaxError("unexpected text after block header", line_no, rest_col);
        block = head == "dynamics" ? Block::dynamics : head == "measure" ? Block::measure : Block::reduce;
        if (block != Block::reduce) {
          bool& seen = block == Block::dynamics ? seen_dynamics : seen_measure;
          if (seen) throw SyntaxError("duplicate '" + head + "' block", line_no, col);
          seen = true;
        }
        block_line = line_no;
        block_col = col;
        block_entries = 0;
        if (end == text.size()) break;
        continue;
      }
      throw SyntaxError("unknown block '" + head + "'", line_no, col);
    }

    if (block == Block::none) throw SyntaxError("statement outside of a block", line_no, col);
    const auto eq = content.find('=');
    if (eq == std::string_view::npos) throw SyntaxError("expected '='", line_no, col + content.size());
    auto lhs = trim(content.substr(0, eq));
    const auto rhs = content.substr(eq + 1);
    const std::size_t rhs_col = col + eq + 1;
    ++block_entries;
    if (block == Block::dynamics) {
      if (lhs.rfind("d/dt", 0) != 0) throw SyntaxError("expected 'd/dt NAME ='", line_no, col);
      lhs = trim(lhs.substr(4));
      dyn_lines.push_back({std::string(lhs), std::string(rhs), line_no, col + 4, rhs_col});
    } else if (block == Block::measure) {
      measure_lines.push_back({std::string(lhs), std::string(rhs), line_no, col, rhs_col});
    } else {
      reduce_lines.push_back({std::string(lhs), std::string(rhs), line_no, col, rhs_col});
    }
    if (end == text.size()) break;
  }
  close_block();

  if (!seen_states || m.state_names.empty()) throw SyntaxError("missing 'states' block", line_no, 1);
  if (!seen_dynamics) throw SyntaxError("missing 'dynamics' block", line_no, 1);
  if (!seen_measure) throw SyntaxError("missing 'measure' block", line_no, 1);
  {
    std::set<std::string> names;
    for (const auto* list : {&m.state_names, &m.param_names, &m.input_names})
      for (const auto& n : *list) {
        if (!names.insert(n).second) throw InvalidModel("symbol '" + n + "' declared twice");
        if (n.size() > 1 && n[0] == 'y' &&
            std::all_of(n.begin() + 1, n.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
          throw InvalidModel("name '" + n + "' is reserved for outputs");
      }
  }

  auto parse_rhs = [&](const Pending& p) {
    detail::ExprParser ep(p.rhs, p.line, p.rhs_col, [&](const std::string& n) { return detail::resolve_plain(m, n); });
    return ep.parse();
  };

  dynamics.assign(m.num_states(), std::nullopt);
  for (const auto& p : dyn_lines) {
    auto idx = m.state_index(p.lhs);
    if (!idx) throw UndeclaredSymbol("line " + std::to_string(p.line) + ", column " + std::to_string(p.lhs_col) +
                                     ": '" + p.lhs + "' is not a declared state");
    if (dynamics[*idx]) throw InvalidModel("state '" + p.lhs + "' has two equations");
    dynamics[*idx] = parse_rhs(p);
  }
  for (std::size_t i = 0; i < m.num_states(); ++i) {
    if (!dynamics[i]) throw InvalidModel("state '" + m.state_names[i] + "' has no equation");
    m.dynamics.push_back(*dynamics[i]);
  }
  for (std::size_t k = 0; k < measure_lines.size(); ++k) {
    const auto& p = measure_lines[k];
    if (p.lhs != "y" + std::to_string(k + 1))
      throw SyntaxError("expected output name 'y" + std::to_string(k + 1) + "'", p.line, p.lhs_col);
    m.measurements.push_back(parse_rhs(p));
    if (m.measurements.back().any_symbol([](Symbol s) { return s.kind == SymbolKind::input; }))
      throw InvalidModel("measurements cannot depend on inputs");
  }
  for (const auto& p : reduce_lines) {
    auto idx = m.state_index(p.lhs);
    if (!idx) throw UndeclaredSymbol("line " + std::to_string(p.line) + ", column " + std::to_string(p.lhs_col) +
                                     ": '" + p.lhs + "' is not a declared state");
    m.reductions.push_back({*idx, parse_rhs(p)});
  }
  validate(m);
  return m;
}

/// Canonical DSL text; parse_model(print_model(m)) == m.
inline std::string print_model(const ModelSpec& m) {
  const auto namer = m.namer();
  auto join = [](const std::vector<std::string>& v) {
    std::string out;
    for (std::size_t k = 0; k < v.size(); ++k) out += (k ? ", " : "") + v[k];
    return out;
  };
  std::ostringstream os;
  os << "states: " << join(m.state_names) << "\n";
  if (!m.param_names.empty()) os << "params: " << join(m.param_names) << "\n";
  if (!m.input_names.empty()) os << "inputs: " << join(m.input_names) << "\n";
  os << "dynamics:\n";
  for (std::size_t i = 0; i < m.num_states(); ++i)
    os << "  d/dt " << m.state_names[i] << " = " << m.dynamics[i].to_string(namer) << "\n";
  os << "measure:\n";
  for (std::size_t k = 0; k < m.num_outputs(); ++k)
    os << "  y" << k + 1 << " = " << m.measurements[k].to_string(namer) << "\n";
  if (!m.reductions.empty()) {
    os << "reduce:\n";
    for (const auto& r : m.reductions) os << "  " << m.state_names[r.state] << " = " << r.value.to_string(namer) << "\n";
  }
  return os.str();
}

}  // namespace obspinn
