#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "obspinn/algebra/poly.hpp"

namespace obspinn {

/// Replacement rule for a state eliminated through a conservation law.
struct Reduction {
  std::size_t state = 0;
  JetPoly value;
  friend bool operator==(const Reduction&, const Reduction&) = default;
};

/// Polynomial state-space model  x' = f(x, u; θ),  y = g(x; θ).
/// States, inputs and parameters are referenced through Symbol indices into
/// the name lists.
struct ModelSpec {
  std::vector<std::string> state_names;
  std::vector<std::string> param_names;
  std::vector<std::string> input_names;
  std::vector<JetPoly> dynamics;
  std::vector<JetPoly> measurements;
  std::vector<Reduction> reductions;

  std::size_t num_states() const { return state_names.size(); }
  std::size_t num_params() const { return param_names.size(); }
  std::size_t num_inputs() const { return input_names.size(); }
  std::size_t num_outputs() const { return measurements.size(); }

  /// Index of the state measured by output m when g_m is a bare state.
  std::optional<std::size_t> projected_state(std::size_t m) const {
    const auto& g = measurements.at(m);
    if (g.size() != 1) return std::nullopt;
    const auto& [mono, c] = *g.terms().begin();
    if (c != 1 || mono.factors().size() != 1 || mono.factors()[0].second != 1) return std::nullopt;
    const Symbol s = mono.factors()[0].first;
    if (s.kind != SymbolKind::state || s.order != 0) return std::nullopt;
    return s.index;
  }

  /// States measured directly by some output (the set 𝓜, zero-based).
  std::set<std::size_t> measured_indices() const {
    std::set<std::size_t> out;
    for (std::size_t m = 0; m < num_outputs(); ++m)
      if (auto s = projected_state(m)) out.insert(*s);
    return out;
  }

  std::optional<std::size_t> state_index(const std::string& name) const { return find(state_names, name); }
  std::optional<std::size_t> param_index(const std::string& name) const { return find(param_names, name); }
  std::optional<std::size_t> input_index(const std::string& name) const { return find(input_names, name); }

  /// Names symbols as in the DSL; jets print as d<k><name>, outputs as y<m>.
  SymbolNamer namer() const {
    return [states = state_names, params = param_names, inputs = input_names](Symbol s) {
      std::string base;
      switch (s.kind) {
        case SymbolKind::param: return s.index < params.size() ? params[s.index] : default_symbol_name(s);
        case SymbolKind::state: base = s.index < states.size() ? states[s.index] : "x" + std::to_string(s.index + 1); break;
        case SymbolKind::output: base = "y" + std::to_string(s.index + 1); break;
        case SymbolKind::input: base = s.index < inputs.size() ? inputs[s.index] : "u" + std::to_string(s.index + 1); break;
      }
      return s.order == 0 ? base : "d" + std::to_string(s.order) + base;
    };
  }

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;

 private:
  static std::optional<std::size_t> find(const std::vector<std::string>& v, const std::string& name) {
    auto it = std::find(v.begin(), v.end(), name);
    if (it == v.end()) return std::nullopt;
    return static_cast<std::size_t>(it - v.begin());
  }
};

namespace detail {

inline JetPoly remap_states(const JetPoly& p, const std::map<std::size_t, std::size_t>& index_map) {
  std::map<Symbol, JetPoly> rules;
  for (Symbol s : p.symbols())
    if (s.kind == SymbolKind::state) {
      auto it = index_map.find(s.index);
      if (it == index_map.end()) throw InvalidModel("state removed while still referenced");
      rules.emplace(s, JetPoly(Symbol::state(static_cast<int>(it->second), s.order)));
    }
  return p.substitute(rules);
}

}  // namespace detail

/// Keeps only the listed states (in the given order). Throws InvalidModel if a
/// kept equation or measurement references a dropped state.
inline ModelSpec restrict_states(const ModelSpec& m, const std::vector<std::size_t>& keep) {
  std::map<std::size_t, std::size_t> index_map;
  for (std::size_t k = 0; k < keep.size(); ++k) index_map[keep[k]] = k;
  ModelSpec out;
  out.param_names = m.param_names;
  out.input_names = m.input_names;
  for (auto i : keep) {
    out.state_names.push_back(m.state_names.at(i));
    out.dynamics.push_back(detail::remap_states(m.dynamics.at(i), index_map));
  }
  for (const auto& g : m.measurements) out.measurements.push_back(detail::remap_states(g, index_map));
  for (const auto& r : m.reductions) {
    auto it = index_map.find(r.state);
    if (it == index_map.end()) continue;
    bool ok = true;
    for (Symbol s : r.value.symbols())
      if (s.kind == SymbolKind::state && !index_map.count(s.index)) ok = false;
    if (ok) out.reductions.push_back({it->second, detail::remap_states(r.value, index_map)});
  }
  return out;
}

/// Drops the listed states, which must not appear in any other equation.
inline ModelSpec drop_states(const ModelSpec& m, const std::set<std::size_t>& drop) {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < m.num_states(); ++i)
    if (!drop.count(i)) keep.push_back(i);
  return restrict_states(m, keep);
}

/// The reduced system: every state with a reduction rule is substituted out
/// of the remaining dynamics and measurements and removed.
inline ModelSpec apply_reductions(const ModelSpec& m) {
  std::map<Symbol, JetPoly> rules;
  std::set<std::size_t> removed;
  for (const auto& r : m.reductions) {
    rules.emplace(Symbol::state(static_cast<int>(r.state)), r.value);
    removed.insert(r.state);
  }
  ModelSpec sub = m;
  sub.reductions.clear();
  for (std::size_t i = 0; i < m.num_states(); ++i)
    if (!removed.count(i)) sub.dynamics[i] = m.dynamics[i].substitute(rules);
  for (auto& g : sub.measurements) g = g.substitute(rules);
  return drop_states(sub, removed);
}

/// Replaces parameters by exact values; the parameter list is kept.
inline ModelSpec substitute_params(const ModelSpec& m, const std::map<std::size_t, Rational>& values) {
  std::map<Symbol, JetPoly> rules;
  for (const auto& [k, v] : values) rules.emplace(Symbol::param(static_cast<int>(k)), JetPoly(v));
  ModelSpec out = m;
  for (auto& f : out.dynamics) f = f.substitute(rules);
  for (auto& g : out.measurements) g = g.substitute(rules);
  for (auto& r : out.reductions) r.value = r.value.substitute(rules);
  return out;
}

/// States that can influence output `m` through the dynamics, sorted.
inline std::vector<std::size_t> influencing_states(const ModelSpec& model, std::size_t m) {
  std::set<std::size_t> seen;
  std::vector<std::size_t> stack;
  for (Symbol s : model.measurements.at(m).symbols())
    if (s.kind == SymbolKind::state && seen.insert(s.index).second) stack.push_back(s.index);
  while (!stack.empty()) {
    const auto i = stack.back();
    stack.pop_back();
    for (Symbol s : model.dynamics[i].symbols())
      if (s.kind == SymbolKind::state && seen.insert(s.index).second) stack.push_back(s.index);
  }
  return {seen.begin(), seen.end()};
}

/// Checks the structural invariants; throws InvalidModel.
inline void validate(const ModelSpec& m) {
  if (m.num_states() == 0) throw InvalidModel("model has no states");
  if (m.num_outputs() == 0) throw InvalidModel("model has no measurements");
  if (m.dynamics.size() != m.num_states()) throw InvalidModel("need exactly one equation per state");
  std::set<std::string> names;
  for (const auto* list : {&m.state_names, &m.param_names, &m.input_names})
    for (const auto& n : *list)
      if (!names.insert(n).second) throw InvalidModel("symbol '" + n + "' declared twice");
  auto check = [&](const JetPoly& p, bool allow_inputs, const std::string& where) {
    for (Symbol s : p.symbols()) {
      bool ok = false;
      switch (s.kind) {
        case SymbolKind::param: ok = s.index < m.num_params(); break;
        case SymbolKind::state: ok = s.index < m.num_states() && s.order == 0; break;
        case SymbolKind::input: ok = allow_inputs && s.index < m.num_inputs() && s.order == 0; break;
        case SymbolKind::output: ok = false; break;
      }
      if (!ok) throw InvalidModel("invalid symbol in " + where);
    }
  };
  for (const auto& f : m.dynamics) check(f, true, "dynamics");
  for (const auto& g : m.measurements) check(g, false, "measurement");
  for (const auto& r : m.reductions) {
    if (r.state >= m.num_states()) throw InvalidModel("reduction of an unknown state");
    check(r.value, false, "reduction");
  }
}

}  // namespace obspinn
