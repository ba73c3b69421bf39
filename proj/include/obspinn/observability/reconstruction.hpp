#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "obspinn/algebra/poly_gcd.hpp"
#include "obspinn/observability/analysis.hpp"

namespace obspinn {

/// x_i = numerator / denominator, both polynomials in output jets, input
/// jets and parameters.
struct ReconstructionExpr {
  std::size_t state = 0;
  std::string name;
  JetPoly numerator;
  JetPoly denominator;
  unsigned output_order = 0;
  unsigned input_order = 0;
  bool uses_inputs = false;
};

/// Solves the linear certificate h_1 x_i + h_0 = 0.
inline ReconstructionExpr reconstruction(const StateAnalysis& a) {
  if (!a.certificate) throw Error("state '" + a.name + "' has no certificate");
  const auto& c = *a.certificate;
  if (c.degree != 1) throw DegreeTooHigh("certificate for '" + a.name + "' has degree " + std::to_string(c.degree));
  ReconstructionExpr e;
  e.state = a.state;
  e.name = a.name;
  const auto [factor, den] = integer_primitive(c.coefficients[1]);
  e.denominator = den;
  e.numerator = -(c.coefficients[0] * factor);
  e.output_order = c.output_order;
  e.input_order = c.input_order;
  e.uses_inputs = c.uses_inputs;
  return e;
}

/// Numeric jet values at one time point.
struct JetValues {
  std::vector<std::vector<double>> outputs;  // outputs[m][k] = y_m^(k)
  std::vector<std::vector<double>> inputs;   // inputs[l][k] = u_l^(k)
};

namespace detail {

inline double jet_value(Symbol s, const JetValues& jets, const std::vector<double>& theta) {
  switch (s.kind) {
    case SymbolKind::param: return theta.at(s.index);
    case SymbolKind::output: return jets.outputs.at(s.index).at(s.order);
    case SymbolKind::input: return jets.inputs.at(s.index).at(s.order);
    case SymbolKind::state: break;
  }
  throw Error("reconstruction expression contains a state");
}

}  // namespace detail

/// Threshold below which the denominator is treated as vanishing.
inline double denominator_tolerance(const ReconstructionExpr& e) {
  return 1e-12 * e.denominator.max_abs_coefficient().get_d();
}

inline double evaluate_reconstruction(const ReconstructionExpr& e, const JetValues& jets,
                                      const std::vector<double>& theta) {
  auto value = [&](Symbol s) { return detail::jet_value(s, jets, theta); };
  const double den = e.denominator.evaluate<double>(value);
  if (!(std::abs(den) > denominator_tolerance(e)))
    throw DenominatorNearZero("reconstruction denominator vanishes for '" + e.name + "'");
  return e.numerator.evaluate<double>(value) / den;
}

}  // namespace obspinn
