#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "obspinn/algebra/groebner.hpp"
#include "obspinn/model/jet.hpp"
#include "obspinn/model/model.hpp"

namespace obspinn {

/// Prolonged ideal for one target state together with its elimination order
/// {other state jets} > {x_i} > {output and input jets}.
struct ObservabilityIdeal {
  ModelSpec system;  // the system the ideal was built from
  std::size_t target = 0;
  std::size_t output = 0;
  std::vector<JetPoly> generators;
  MonomialOrder order;
};

/// Polynomial H_i = sum_j h_j x_i^j in the elimination ideal with h_k outside
/// the ideal.
struct Certificate {
  JetPoly polynomial;
  std::vector<JetPoly> coefficients;  // h_0 .. h_k
  unsigned degree = 0;
  unsigned output_order = 0;  // highest output jet used (p)
  unsigned input_order = 0;   // highest input jet used (q)
  bool uses_inputs = false;
};

struct StateAnalysis {
  std::size_t state = 0;  // index in the reduced system
  std::string name;
  std::optional<Certificate> certificate;
  std::string reason;  // why no certificate was found
  GroebnerStats stats;

  bool observable() const { return certificate.has_value(); }
};

struct AnalysisOptions {
  std::vector<std::size_t> outputs{0};
  GroebnerBudget budget;
};

struct ObservabilityResult {
  ModelSpec system;  // reduced system; state indices below refer to it
  std::size_t output = 0;
  std::vector<StateAnalysis> states;

  std::vector<std::size_t> observable_set() const {
    std::vector<std::size_t> out;
    for (const auto& s : states)
      if (s.observable()) out.push_back(s.state);
    return out;
  }
  std::vector<std::size_t> unobservable_set() const {
    std::vector<std::size_t> out;
    for (const auto& s : states)
      if (!s.observable()) out.push_back(s.state);
    return out;
  }
  const StateAnalysis* find(const std::string& name) const {
    for (const auto& s : states)
      if (s.name == name) return &s;
    return nullptr;
  }
};

namespace detail {

inline std::size_t single_output(const AnalysisOptions& opt, const ModelSpec& m) {
  if (opt.outputs.size() != 1) throw UnsupportedMultiOutput("analysis supports exactly one output");
  if (opt.outputs[0] >= m.num_outputs()) throw InvalidModel("analysis output out of range");
  return opt.outputs[0];
}

inline unsigned max_order_of(const JetPoly& p, SymbolKind kind) {
  unsigned best = 0;
  for (Symbol s : p.symbols())
    if (s.kind == kind) best = std::max<unsigned>(best, s.order);
  return best;
}

}  // namespace detail

/// Builds the ideal generated by D^j(x' - f), j = 0..N-2, and D^j(y - g),
/// j = 0..N-1, for a system without reductions.
inline ObservabilityIdeal build_ideal(const ModelSpec& system, std::size_t target, std::size_t output = 0) {
  if (!system.reductions.empty()) throw InvalidModel("build_ideal expects a reduced system");
  const std::size_t N = system.num_states();
  if (target >= N) throw InvalidModel("target state out of range");
  if (system.measured_indices().count(target)) throw NoUnmeasuredState("target state is measured");
  if (output >= system.num_outputs()) throw InvalidModel("analysis output out of range");

  ObservabilityIdeal J;
  J.system = system;
  J.target = target;
  J.output = output;
  for (std::size_t i = 0; i < N; ++i) {
    JetPoly g = JetPoly(Symbol::state(static_cast<int>(i), 1)) - system.dynamics[i];
    for (std::size_t j = 0; j + 1 < N; ++j) {
      J.generators.push_back(g);
      g = total_derivative(g);
    }
  }
  JetPoly h = JetPoly(Symbol::output(static_cast<int>(output))) - system.measurements[output];
  for (std::size_t j = 0; j < N; ++j) {
    J.generators.push_back(h);
    h = total_derivative(h);
  }

  std::vector<Symbol> high, low;
  for (std::size_t order = 0; order < N; ++order)
    for (std::size_t i = 0; i < N; ++i)
      if (!(i == target && order == 0)) high.push_back(Symbol::state(static_cast<int>(i), static_cast<int>(order)));
  for (std::size_t order = 0; order < N; ++order) low.push_back(Symbol::output(static_cast<int>(output), static_cast<int>(order)));
  for (std::size_t l = 0; l < system.num_inputs(); ++l)
    for (std::size_t order = 0; order + 1 < std::max<std::size_t>(N, 2); ++order)
      low.push_back(Symbol::input(static_cast<int>(l), static_cast<int>(order)));
  J.order = MonomialOrder({high, {Symbol::state(static_cast<int>(target))}, low});
  return J;
}

/// Decides algebraic observability of one state of a reduced system.
inline StateAnalysis analyze(const ModelSpec& system, std::size_t target, const AnalysisOptions& opt = {}) {
  const std::size_t output = detail::single_output(opt, system);
  StateAnalysis out;
  out.state = target;
  out.name = system.state_names.at(target);
  if (system.measured_indices().count(target)) throw NoUnmeasuredState("state '" + out.name + "' is measured");

  // States that cannot influence the output carry no information about it.
  const auto relevant = influencing_states(system, output);
  const auto pos = std::find(relevant.begin(), relevant.end(), target);
  if (pos == relevant.end()) {
    out.reason = "state does not influence the analysis output";
    return out;
  }
  // Other outputs play no role; keeping only the analysis output as y1 also
  // lets measurements of pruned states disappear.
  ModelSpec single = system;
  single.measurements = {system.measurements[output]};
  const ModelSpec sub = restrict_states(single, relevant);
  const auto sub_target = static_cast<std::size_t>(pos - relevant.begin());

  const auto J = build_ideal(sub, sub_target, 0);
  const auto G = buchberger(J.generators, J.order, opt.budget);
  out.stats = G.stats;
  const Symbol xi = Symbol::state(static_cast<int>(sub_target));

  struct Candidate {
    Certificate cert;
    std::string text;
  };
  std::optional<Candidate> best;
  for (const auto& g : G.generators) {
    if (g.degree(xi) == 0) continue;
    bool low_only = true;
    for (Symbol s : g.symbols())
      if (!s.is_param() && J.order.block_of(s) == 0) low_only = false;
    if (!low_only) continue;
    Certificate c;
    c.degree = g.degree(xi);
    for (unsigned k = 0; k <= c.degree; ++k) c.coefficients.push_back(g.coefficient(xi, k));
    if (is_member(c.coefficients.back(), G)) continue;
    c.output_order = detail::max_order_of(g, SymbolKind::output);
    c.uses_inputs = g.any_symbol([](Symbol s) { return s.kind == SymbolKind::input; });
    c.input_order = detail::max_order_of(g, SymbolKind::input);
    // Express the certificate in the caller's state indexing.
    std::map<Symbol, JetPoly> back{{xi, JetPoly(Symbol::state(static_cast<int>(target)))}};
    for (Symbol s : g.symbols())
      if (s.kind == SymbolKind::output) back.emplace(s, JetPoly(Symbol::output(static_cast<int>(output), s.order)));
    c.polynomial = g.substitute(back);
    for (auto& h : c.coefficients) h = h.substitute(back);
    Candidate cand{c, c.polynomial.to_string(system.namer())};
    const auto key = [](const Candidate& k) { return std::make_tuple(k.cert.degree, k.cert.output_order, k.text); };
    if (!best || key(cand) < key(*best)) best = std::move(cand);
  }
  if (best) out.certificate = std::move(best->cert);
  else out.reason = "no elimination-ideal element with a leading coefficient outside the ideal";
  return out;
}

/// Analyses every unmeasured state of the reduced system derived from `m`.
inline ObservabilityResult analyze_all(const ModelSpec& m, const AnalysisOptions& opt = {}) {
  ObservabilityResult r;
  r.system = apply_reductions(m);
  r.output = detail::single_output(opt, r.system);
  const auto measured = r.system.measured_indices();
  for (std::size_t i = 0; i < r.system.num_states(); ++i)
    if (!measured.count(i)) r.states.push_back(analyze(r.system, i, opt));
  if (r.states.empty()) throw NoUnmeasuredState("every state is measured");
  return r;
}

}  // namespace obspinn
