#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "obspinn/io.hpp"
#include "obspinn/model/parser.hpp"
#include "obspinn/simulate/integrate.hpp"

namespace obspinn {

namespace presets {

inline constexpr const char* seir = R"(# SEIR: susceptible, exposed, infectious, recovered
states: S, E, I, R
params: beta, epsilon, gamma
dynamics:
  d/dt S = -beta*S*I
  d/dt E = beta*S*I - epsilon*E
  d/dt I = epsilon*E - gamma*I
  d/dt R = gamma*I
measure:
  y1 = I
reduce:
  R = 1 - (S + E + I)
)";

inline constexpr const char* sicrd = R"(# SICRD: susceptible, infectious, confined, recovered, dead
states: S, I, C, R, D
params: beta, p, q, r, mu
dynamics:
  d/dt S = -beta*S*I - q*S + p*C
  d/dt I = beta*S*I - (r + mu)*I
  d/dt C = q*S - p*C
  d/dt R = r*I
  d/dt D = mu*I
measure:
  y1 = I
reduce:
  D = 1 - (S + I + C + R)
)";

inline constexpr const char* saird = R"(# SAIRD: susceptible, asymptomatic, infectious, recovered, dead
# u = exp(-k t) scales the contact rates.
states: S, A, I, R, D
params: beta, xi, kappa, gamma, delta
inputs: u
dynamics:
  d/dt S = -beta*u*S*I - xi*u*S*A
  d/dt A = beta*u*S*I + xi*u*S*A - kappa*A
  d/dt I = kappa*A - (gamma + delta)*I
  d/dt R = gamma*I
  d/dt D = delta*I
measure:
  y1 = I
  y2 = R
reduce:
  D = 1 - (S + A + I + R)
)";

}  // namespace presets

/// One estimation problem: model, ground truth, and which parameters are
/// unknown.
struct Scenario {
  std::string id;
  ModelSpec model;                 // full system, integrated and learned by the network
  ModelSpec analysis;              // known parameters substituted where the analysis uses them
  std::vector<double> theta_true;  // every parameter, true values
  std::vector<std::size_t> unknown;
  std::vector<double> x0;
  std::vector<std::size_t> init_known;  // states whose initial value enters L_init
  InputFunction input;
  std::size_t analysis_output = 0;
  double T = 200.0;
  double dt = 0.2;
  double box_low = 0.0, box_high = 0.5;
  std::size_t default_iterations = 30;  // BO budget S of the full profile

  ModelSpec reduced() const { return apply_reductions(model); }

  std::vector<std::string> unknown_names() const {
    std::vector<std::string> out;
    for (auto k : unknown) out.push_back(model.param_names[k]);
    return out;
  }
  std::vector<double> unknown_true() const {
    std::vector<double> out;
    for (auto k : unknown) out.push_back(theta_true[k]);
    return out;
  }
  /// Full parameter vector with the unknown entries replaced.
  std::vector<double> theta_with(const std::vector<double>& unknown_values) const {
    if (unknown_values.size() != unknown.size()) throw InvalidModel("wrong number of unknown parameter values");
    auto theta = theta_true;
    for (std::size_t j = 0; j < unknown.size(); ++j) theta[unknown[j]] = unknown_values[j];
    return theta;
  }
  /// Measured state indices of the full model.
  std::vector<std::size_t> measured() const {
    const auto s = model.measured_indices();
    return {s.begin(), s.end()};
  }
};

struct ScenarioOptions {
  std::vector<std::string> unknown;  // empty: the scenario's default
  bool drop_r0 = false;              // SICRD: R(0) is not used in L_init
};

namespace detail {

inline std::size_t param_index(const ModelSpec& m, const std::string& name) {
  if (auto k = m.param_index(name)) return *k;
  throw InvalidModel("unknown parameter '" + name + "'");
}

inline Rational exact(double v) {
  // Preset values are short decimals; parse them from their shortest text.
  return detail::parse_decimal(format_double(v));
}

}  // namespace detail

inline std::vector<std::string> scenario_ids() { return {"seir", "sicrd", "saird"}; }

inline const char* preset_text(const std::string& id) {
  if (id == "seir") return presets::seir;
  if (id == "sicrd") return presets::sicrd;
  if (id == "saird") return presets::saird;
  throw InvalidModel("unknown scenario '" + id + "'");
}

/// Builds a preset. Parameters substituted before the analysis: SICRD r and
/// mu; SAIRD gamma, delta, and kappa whenever kappa is known.
inline Scenario make_scenario(const std::string& id, const ScenarioOptions& opt = {}) {
  Scenario s;
  s.id = id;
  s.model = parse_model(preset_text(id));
  std::vector<std::string> unknown = opt.unknown;
  std::vector<std::string> substituted;
  if (id == "seir") {
    s.theta_true = {0.26, 0.2, 0.1};
    s.x0 = {0.99, 0.0, 0.01, 0.0};
    if (unknown.empty()) unknown = {"epsilon"};
  } else if (id == "sicrd") {
    s.theta_true = {0.26, 0.01, 0.01, 0.05, 0.05};
    s.x0 = {0.99, 0.01, 0.0, 0.0, 0.0};
    if (unknown.empty()) unknown = {"beta"};
    substituted = {"r", "mu"};
  } else if (id == "saird") {
    s.theta_true = {0.26, 0.1, 0.1, 0.05, 0.05};
    s.x0 = {0.985, 0.005, 0.01, 0.0, 0.0};
    s.input = InputFunction::exp_decay(0.01);
    s.default_iterations = 50;
    if (unknown.empty()) unknown = {"beta", "kappa"};
    substituted = {"gamma", "delta"};
    if (std::find(unknown.begin(), unknown.end(), "kappa") == unknown.end()) substituted.push_back("kappa");
  } else {
    throw InvalidModel("unknown scenario '" + id + "'");
  }
  for (const auto& name : unknown) {
    const auto k = detail::param_index(s.model, name);
    if (std::find(substituted.begin(), substituted.end(), name) != substituted.end())
      throw InvalidModel("parameter '" + name + "' is fixed in the analysis of scenario " + id);
    if (std::find(s.unknown.begin(), s.unknown.end(), k) != s.unknown.end())
      throw InvalidModel("parameter '" + name + "' listed twice");
    s.unknown.push_back(k);
  }
  std::sort(s.unknown.begin(), s.unknown.end());
  std::map<std::size_t, Rational> values;
  for (const auto& name : substituted) {
    const auto k = detail::param_index(s.model, name);
    values.emplace(k, detail::exact(s.theta_true[k]));
  }
  s.analysis = substitute_params(s.model, values);
  for (std::size_t i = 0; i < s.model.num_states(); ++i) s.init_known.push_back(i);
  if (opt.drop_r0) {
    if (id != "sicrd") throw InvalidModel("drop_r0 applies to the sicrd scenario only");
    s.init_known.erase(std::find(s.init_known.begin(), s.init_known.end(), *s.model.state_index("R")));
  }
  return s;
}

/// Noise-free trajectory of the full model at the true parameters.
inline Trajectory simulate_truth(const Scenario& s) { return integrate(s.model, s.theta_true, s.x0, s.T, s.dt, s.input); }

}  // namespace obspinn
