#pragma once

#include <map>
#include <utility>

#include "obspinn/model/model.hpp"

namespace obspinn {

/// Formal total time derivative: D(v^(j)) = v^(j+1) for jets, D(θ) = 0.
inline JetPoly total_derivative(const JetPoly& p) {
  JetPoly out;
  for (Symbol s : p.symbols()) {
    if (s.is_param()) continue;
    out += p.partial(s) * JetPoly(s.prolonged());
  }
  return out;
}

inline JetPoly total_derivative(const JetPoly& p, unsigned times) {
  JetPoly out = p;
  for (unsigned k = 0; k < times; ++k) out = total_derivative(out);
  return out;
}

/// Rewrites state and output jets as polynomials in the order-0 states,
/// input jets and parameters by repeatedly replacing x_i' with f_i and y_m
/// with g_m. Throws OrderOverflow for jets above `max_order`.
class DynamicsSubstituter {
 public:
  DynamicsSubstituter(const ModelSpec& m, unsigned max_order) : m_(m), max_order_(max_order) {}

  const JetPoly& state_jet(std::size_t i, unsigned order) {
    if (order > max_order_) throw OrderOverflow("state derivative order exceeds the substitution budget");
    const auto key = std::make_pair(i, order);
    if (auto it = states_.find(key); it != states_.end()) return it->second;
    JetPoly value;
    if (order == 0) value = JetPoly(Symbol::state(static_cast<int>(i)));
    else if (order == 1) value = m_.dynamics.at(i);
    else value = apply(total_derivative(state_jet(i, order - 1)));
    return states_.emplace(key, std::move(value)).first->second;
  }

  const JetPoly& output_jet(std::size_t m, unsigned order) {
    if (order > max_order_) throw OrderOverflow("output derivative order exceeds the substitution budget");
    const auto key = std::make_pair(m, order);
    if (auto it = outputs_.find(key); it != outputs_.end()) return it->second;
    JetPoly value = order == 0 ? m_.measurements.at(m) : apply(total_derivative(output_jet(m, order - 1)));
    return outputs_.emplace(key, std::move(value)).first->second;
  }

  JetPoly apply(const JetPoly& p) {
    std::map<Symbol, JetPoly> rules;
    for (Symbol s : p.symbols()) {
      if (s.kind == SymbolKind::state && s.order > 0) rules.emplace(s, state_jet(s.index, s.order));
      if (s.kind == SymbolKind::output) rules.emplace(s, output_jet(s.index, s.order));
    }
    return rules.empty() ? p : p.substitute(rules);
  }

 private:
  const ModelSpec& m_;
  unsigned max_order_;
  std::map<std::pair<std::size_t, unsigned>, JetPoly> states_, outputs_;
};

inline JetPoly substitute_dynamics(const JetPoly& p, const ModelSpec& m, unsigned max_order) {
  return DynamicsSubstituter(m, max_order).apply(p);
}

/// y_m^(k) as a polynomial in states, input jets and parameters.
inline JetPoly output_derivative(const ModelSpec& m, std::size_t output, unsigned k) {
  return DynamicsSubstituter(m, k).output_jet(output, k);
}

}  // namespace obspinn
