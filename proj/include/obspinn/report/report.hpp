#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "obspinn/report/metrics.hpp"
#include "obspinn/report/svg.hpp"
#include "obspinn/training/train.hpp"

namespace obspinn {

struct MetricRow {
  std::string metric;  // RSE or RAE
  std::string target;  // state or parameter name
  std::string split;   // test, val, or "-" for parameters
  double value = 0.0;
};

/// Network evaluated at the split's times; [i][d].
inline std::vector<std::vector<double>> predict(const Mlp& net, const std::vector<double>& times) {
  const auto pass = net.forward_pass(times);
  std::vector<std::vector<double>> out(static_cast<std::size_t>(pass.x().rows()), std::vector<double>(times.size()));
  for (std::size_t i = 0; i < out.size(); ++i)
    for (std::size_t d = 0; d < times.size(); ++d) out[i][d] = pass.x()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d));
  return out;
}

/// RSE of every state on the test and validation splits, then RAE of every
/// estimated parameter.
inline std::vector<MetricRow> compute_metrics(const Scenario& s, const Dataset& d, const Mlp& net, const std::vector<double>& theta_unknown) {
  std::vector<MetricRow> rows;
  for (const auto& [name, split] : {std::pair<std::string, const SplitData*>{"test", &d.test}, {"val", &d.val}}) {
    const auto pred = predict(net, split->t);
    for (std::size_t i = 0; i < s.model.num_states(); ++i) {
      std::vector<double> truth(split->size());
      for (std::size_t k = 0; k < split->size(); ++k) truth[k] = split->truth[k][i];
      rows.push_back({"RSE", s.model.state_names[i], name, rse(pred[i], truth)});
    }
  }
  if (theta_unknown.size() != s.unknown.size()) throw InvalidModel("estimate has the wrong number of parameters");
  for (std::size_t j = 0; j < s.unknown.size(); ++j)
    rows.push_back({"RAE", s.model.param_names[s.unknown[j]], "-", rae(theta_unknown[j], s.theta_true[s.unknown[j]])});
  return rows;
}

inline double metric_value(const std::vector<MetricRow>& rows, const std::string& metric, const std::string& target,
                           const std::string& split = "test") {
  for (const auto& r : rows)
    if (r.metric == metric && r.target == target && (metric == "RAE" || r.split == split)) return r.value;
  throw InvalidModel("no " + metric + " row for " + target);
}

inline CsvTable metrics_csv(const std::vector<MetricRow>& rows) {
  CsvTable t;
  t.header = {"metric", "target", "split", "value"};
  for (const auto& r : rows) t.rows.push_back({r.metric, r.target, r.split, format_double(r.value)});
  return t;
}

inline std::vector<MetricRow> parse_metrics_csv(const std::string& text) {
  const auto t = CsvTable::parse(text);
  std::vector<MetricRow> rows;
  const auto m = t.column("metric"), g = t.column("target"), sp = t.column("split"), v = t.column("value");
  for (std::size_t r = 0; r < t.rows.size(); ++r) rows.push_back({t.rows[r][m], t.rows[r][g], t.rows[r][sp], t.number(r, v)});
  return rows;
}

/// Network output and truth on the simulation grid.
inline CsvTable predictions_csv(const Scenario& s, const Mlp& net) {
  const auto traj = simulate_truth(s);
  const auto pred = predict(net, traj.times);
  CsvTable t;
  t.header.push_back("t");
  for (const auto& n : s.model.state_names) t.header.push_back("nn_" + n);
  for (const auto& n : s.model.state_names) t.header.push_back("true_" + n);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    std::vector<double> row{traj.times[k]};
    for (const auto& p : pred) row.push_back(p[k]);
    for (double v : traj.states[k]) row.push_back(v);
    t.add_row(row);
  }
  return t;
}

inline CsvTable losses_csv(const std::vector<EpochRecord>& trace) {
  CsvTable t;
  t.header = {"epoch", "L_eq", "L_init", "L_data", "L_aug", "total"};
  for (const auto& r : trace) {
    t.rows.push_back({std::to_string(r.epoch), format_double(r.parts.eq), format_double(r.parts.init), format_double(r.parts.data),
                      format_double(r.parts.aug), format_double(r.parts.total)});
  }
  return t;
}

inline CsvTable bo_history_csv(const std::vector<BoRecord>& history, const std::vector<std::string>& names) {
  CsvTable t;
  t.header.push_back("s");
  for (const auto& n : names) t.header.push_back(n);
  t.header.push_back("E_val");
  for (std::size_t k = 0; k < history.size(); ++k) {
    std::vector<std::string> row{std::to_string(k + 1)};
    for (double v : history[k].x) row.push_back(format_double(v));
    row.push_back(format_double(history[k].value));
    t.rows.push_back(std::move(row));
  }
  return t;
}

/// One panel per state: truth, network output, and the training data of
/// the measured states.
inline std::string states_svg(const Scenario& s, const Dataset& d, const Mlp& net, const std::string& caption) {
  const auto traj = simulate_truth(s);
  const auto pred = predict(net, traj.times);
  SvgFigure fig(std::min<std::size_t>(s.model.num_states(), 3));
  const auto measured = s.measured();
  for (std::size_t i = 0; i < s.model.num_states(); ++i) {
    auto& p = fig.add_panel(s.model.state_names[i] + " (" + caption + ")");
    p.xlabel = "t";
    std::vector<double> truth(traj.size());
    for (std::size_t k = 0; k < traj.size(); ++k) truth[k] = traj.states[k][i];
    p.series.push_back({traj.times, truth, "#222222", true, false, "truth"});
    p.series.push_back({traj.times, pred[i], "#d62728", true, true, "network"});
    if (std::find(measured.begin(), measured.end(), i) != measured.end()) {
      std::vector<double> y;
      for (const auto& x : d.train.noisy) y.push_back(x[i]);
      p.series.push_back({d.train.t, y, "#1f77b4", false, false, "data"});
    }
  }
  return fig.render();
}

/// E_val against each searched parameter; several parameters are shown as
/// separate projections.
inline std::string bo_svg(const Scenario& s, const std::vector<BoRecord>& history, std::size_t s_star) {
  SvgFigure fig(std::max<std::size_t>(s.unknown.size(), 1));
  for (std::size_t j = 0; j < s.unknown.size(); ++j) {
    const auto& name = s.model.param_names[s.unknown[j]];
    auto& p = fig.add_panel("E_val vs " + name);
    p.xlabel = name;
    p.ylabel = "E_val";
    p.log_y = true;
    SvgFigure::Series all{{}, {}, "#1f77b4", false, false, "candidates"};
    SvgFigure::Series chosen{{}, {}, "#d62728", false, false, "selected"};
    for (std::size_t k = 0; k < history.size(); ++k) {
      if (!std::isfinite(history[k].value) || history[k].value <= 0) continue;
      (k == s_star ? chosen : all).x.push_back(history[k].x[j]);
      (k == s_star ? chosen : all).y.push_back(history[k].value);
    }
    p.series.push_back(all);
    p.series.push_back(chosen);
    p.vlines.push_back(s.theta_true[s.unknown[j]]);
  }
  return fig.render();
}

/// Network plus the parameter estimate it was selected with.
struct Checkpoint {
  Mlp net;
  std::string scenario;
  std::string mode;
  std::vector<std::string> unknown;
  std::vector<double> theta_unknown;

  nlohmann::json to_json() const {
    return {{"format", "obspinn-checkpoint"}, {"version", 1}, {"scenario", scenario}, {"mode", mode},
            {"unknown", unknown}, {"theta_unknown", theta_unknown}, {"network", net.to_json()}};
  }
  static Checkpoint from_json(const nlohmann::json& j) {
    try {
      if (j.at("format") != "obspinn-checkpoint" || j.at("version") != 1) throw IOError("unsupported checkpoint format");
      Checkpoint c;
      c.scenario = j.at("scenario").get<std::string>();
      c.mode = j.at("mode").get<std::string>();
      c.unknown = j.at("unknown").get<std::vector<std::string>>();
      c.theta_unknown = j.at("theta_unknown").get<std::vector<double>>();
      c.net = Mlp::from_json(j.at("network"));
      return c;
    } catch (const nlohmann::json::exception& e) {
      throw IOError(std::string("invalid checkpoint: ") + e.what());
    }
  }
};

/// report.csv and the plots for a trained network.
inline std::vector<MetricRow> write_evaluation(const std::filesystem::path& dir, const Scenario& s, const Dataset& d, const Checkpoint& c,
                                              const std::vector<BoRecord>& history = {}, std::size_t s_star = 0) {
  const auto rows = compute_metrics(s, d, c.net, c.theta_unknown);
  write_text(dir / "report.csv", metrics_csv(rows).to_string());
  write_text(dir / "predictions.csv", predictions_csv(s, c.net).to_string());
  write_text(dir / ("states_" + s.id + ".svg"), states_svg(s, d, c.net, c.mode));
  if (!history.empty()) write_text(dir / ("bo_" + s.id + ".svg"), bo_svg(s, history, s_star));
  return rows;
}

/// Every artifact of a training run except config.json.
inline std::vector<MetricRow> emit_report(const std::filesystem::path& dir, const Scenario& s, const Dataset& d, const TrainOutcome& o) {
  Checkpoint c{o.net, s.id, to_string(o.mode), s.unknown_names(), o.theta_unknown};
  write_text(dir / "checkpoint.json", c.to_json().dump() + "\n");
  write_text(dir / "losses.csv", losses_csv(o.trace).to_string());
  if (!o.history.empty()) write_text(dir / "bo_history.csv", bo_history_csv(o.history, s.unknown_names()).to_string());
  return write_evaluation(dir, s, d, c, o.history, o.s_star);
}

}  // namespace obspinn
