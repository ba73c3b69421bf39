#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "obspinn/io.hpp"
#include "obspinn/model/jet.hpp"
#include "obspinn/observability/reconstruction.hpp"
#include "obspinn/scenarios/scenario.hpp"
#include "obspinn/simulate/compiled.hpp"

namespace obspinn {

/// Time points of one split with measurements, jet estimates and truth.
struct SplitData {
  std::vector<double> t;
  std::vector<JetValues> jets;              // outputs[m][k] = y_m^(k), inputs[l][k] = u_l^(k)
  std::vector<std::vector<double>> truth;   // noise-free states (evaluation only)
  std::vector<std::vector<double>> noisy;   // states the measurements were computed from

  std::size_t size() const { return t.size(); }
  double measurement(std::size_t d, std::size_t m) const { return jets[d].outputs[m][0]; }
  friend bool operator==(const SplitData& a, const SplitData& b) {
    if (a.t != b.t || a.truth != b.truth || a.noisy != b.noisy || a.jets.size() != b.jets.size()) return false;
    for (std::size_t d = 0; d < a.jets.size(); ++d)
      if (a.jets[d].outputs != b.jets[d].outputs || a.jets[d].inputs != b.jets[d].inputs) return false;
    return true;
  }
};

struct DatasetOptions {
  std::size_t train = 50, val = 50, test = 100;
  bool symmetric_noise = false;  // [-σ/2, σ/2] instead of [0, σ]
};

struct Dataset {
  std::string scenario;
  std::vector<std::string> unknown;
  bool drop_r0 = false;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  bool symmetric_noise = false;
  unsigned output_order = 0;  // p: highest filled output derivative
  unsigned input_order = 0;   // q: highest filled input derivative
  SplitData train, val, test;

  friend bool operator==(const Dataset& a, const Dataset& b) {
    return a.scenario == b.scenario && a.unknown == b.unknown && a.drop_r0 == b.drop_r0 && a.sigma == b.sigma &&
           a.seed == b.seed && a.symmetric_noise == b.symmetric_noise && a.output_order == b.output_order &&
           a.input_order == b.input_order && a.train == b.train && a.val == b.val && a.test == b.test;
  }
};

namespace detail {

// Noisy states at one time point, as used for measurements and jets.
struct NoisyPoint {
  double t;
  std::vector<double> truth;
  std::vector<double> noisy;
};

inline std::vector<NoisyPoint> noisy_points(const std::vector<double>& times, const Trajectory& traj, double sigma,
                                            bool symmetric, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<NoisyPoint> out;
  for (double t : times) {
    NoisyPoint p{t, sample(traj, t), {}};
    p.noisy = p.truth;
    for (double& v : p.noisy) v += sigma * (symmetric ? unit(rng) - 0.5 : unit(rng));
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace detail

/// Highest output derivative any reconstruction can need: N_reduced - 1.
inline unsigned default_output_order(const Scenario& s) {
  const auto N = s.reduced().num_states();
  return N > 0 ? static_cast<unsigned>(N - 1) : 0u;
}

/// Evaluates y^(k) = (D^k g)(x, u, θ*) at states `x` for k = 0..p, and the
/// exact input jets u^(0..q).
class DerivativeOracle {
 public:
  DerivativeOracle(const Scenario& s, unsigned p, unsigned q) : s_(s), p_(p), q_(q) {
    const auto& m = s.model;
    N_ = m.num_states();
    n_ = m.num_params();
    const std::function<std::size_t(Symbol)> slot = [this](Symbol sym) -> std::size_t {
      switch (sym.kind) {
        case SymbolKind::state:
          if (sym.order != 0) break;
          return sym.index;
        case SymbolKind::param: return N_ + sym.index;
        case SymbolKind::input: return N_ + n_ + sym.index * (p_ + 1) + sym.order;
        case SymbolKind::output: break;
      }
      throw InvalidModel("unexpected jet in a derivative expression");
    };
    DynamicsSubstituter sub(m, p);
    for (std::size_t k = 0; k < m.num_outputs(); ++k) {
      polys_.emplace_back();
      for (unsigned j = 0; j <= p; ++j) polys_.back().emplace_back(sub.output_jet(k, j), slot);
    }
    values_.assign(N_ + n_ + m.num_inputs() * (p_ + 1), 0.0);
    std::copy(s.theta_true.begin(), s.theta_true.end(), values_.begin() + static_cast<std::ptrdiff_t>(N_));
  }

  JetValues at(double t, const std::vector<double>& x) {
    std::copy(x.begin(), x.end(), values_.begin());
    for (std::size_t l = 0; l < s_.model.num_inputs(); ++l)
      for (unsigned j = 0; j <= p_; ++j) values_[N_ + n_ + l * (p_ + 1) + j] = s_.input.value(t, j);
    JetValues jv;
    for (const auto& per_output : polys_) {
      jv.outputs.emplace_back();
      for (const auto& poly : per_output) jv.outputs.back().push_back(poly(values_.data()));
    }
    for (std::size_t l = 0; l < s_.model.num_inputs(); ++l) {
      jv.inputs.emplace_back();
      for (unsigned j = 0; j <= q_; ++j) jv.inputs.back().push_back(s_.input.value(t, j));
    }
    return jv;
  }

 private:
  const Scenario& s_;
  unsigned p_, q_;
  std::size_t N_ = 0, n_ = 0;
  std::vector<std::vector<CompiledPoly>> polys_;
  std::vector<double> values_;
};

/// Samples the three splits. Train and test points are distinct solver grid
/// points; validation times are uniform on [0, T]. Each state receives
/// noise at each point and the measurements are g of the noisy states. Only
/// order-0 jets are filled here.
inline Dataset make_dataset(const Scenario& s, double sigma, std::uint64_t seed, const DatasetOptions& opt = {}) {
  if (!(sigma >= 0.0)) throw InvalidModel("noise level must be non-negative");
  const Trajectory traj = simulate_truth(s);
  if (opt.train + opt.test > traj.size()) throw InvalidModel("not enough grid points for the requested splits");
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> grid(traj.size());
  std::iota(grid.begin(), grid.end(), 0);
  std::shuffle(grid.begin(), grid.end(), rng);
  auto grid_times = [&](std::size_t from, std::size_t count) {
    std::vector<std::size_t> idx(grid.begin() + static_cast<std::ptrdiff_t>(from),
                                 grid.begin() + static_cast<std::ptrdiff_t>(from + count));
    std::sort(idx.begin(), idx.end());
    std::vector<double> t;
    for (auto j : idx) t.push_back(traj.times[j]);
    return t;
  };
  const auto t_train = grid_times(0, opt.train);
  const auto t_test = grid_times(opt.train, opt.test);
  std::uniform_real_distribution<double> uniform_t(0.0, s.T);
  std::vector<double> t_val(opt.val);
  for (double& t : t_val) t = uniform_t(rng);
  std::sort(t_val.begin(), t_val.end());

  Dataset d;
  d.scenario = s.id;
  d.unknown = s.unknown_names();
  d.drop_r0 = s.init_known.size() != s.model.num_states();
  d.sigma = sigma;
  d.seed = seed;
  d.symmetric_noise = opt.symmetric_noise;
  DerivativeOracle order0(s, 0, 0);
  auto fill = [&](const std::vector<double>& times, SplitData& split) {
    for (const auto& p : detail::noisy_points(times, traj, sigma, opt.symmetric_noise, rng)) {
      split.t.push_back(p.t);
      split.truth.push_back(p.truth);
      split.noisy.push_back(p.noisy);
      split.jets.push_back(order0.at(p.t, p.noisy));
    }
  };
  fill(t_train, d.train);
  fill(t_val, d.val);
  fill(t_test, d.test);
  return d;
}

/// Fills y^(1..p) and u^(0..q) by evaluating the analytic derivatives of the
/// measurement map at the noisy states with the true parameters.
inline Dataset derivative_oracle(const Scenario& s, const Dataset& in, unsigned p, unsigned q) {
  Dataset out = in;
  out.output_order = p;
  out.input_order = s.model.num_inputs() ? q : 0;
  DerivativeOracle oracle(s, p, out.input_order);
  for (SplitData* split : {&out.train, &out.val, &out.test})
    for (std::size_t j = 0; j < split->size(); ++j) split->jets[j] = oracle.at(split->t[j], split->noisy[j]);
  return out;
}

/// make_dataset followed by derivative_oracle at the default jet orders.
inline Dataset prepare_dataset(const Scenario& s, double sigma, std::uint64_t seed, const DatasetOptions& opt = {}) {
  const unsigned p = default_output_order(s);
  return derivative_oracle(s, make_dataset(s, sigma, seed, opt), p, p > 0 ? p - 1 : 0);
}

// ---------------------------------------------------------------------------
// Files: one CSV per split plus manifest.json.

inline CsvTable split_to_csv(const SplitData& split, const Scenario& s, unsigned p, unsigned q) {
  const auto& m = s.model;
  CsvTable t;
  t.header.push_back("t");
  for (std::size_t k = 0; k < m.num_outputs(); ++k) t.header.push_back("y" + std::to_string(k + 1));
  for (std::size_t k = 0; k < m.num_outputs(); ++k)
    for (unsigned j = 1; j <= p; ++j) t.header.push_back("dy" + std::to_string(k + 1) + "_" + std::to_string(j));
  for (std::size_t l = 0; l < m.num_inputs(); ++l)
    for (unsigned j = 0; j <= q; ++j)
      t.header.push_back(j == 0 ? m.input_names[l] : "d" + m.input_names[l] + "_" + std::to_string(j));
  for (const auto& name : m.state_names) t.header.push_back("truth_" + name);
  for (const auto& name : m.state_names) t.header.push_back("noisy_" + name);
  for (std::size_t d = 0; d < split.size(); ++d) {
    std::vector<double> row{split.t[d]};
    const auto& jv = split.jets[d];
    for (const auto& o : jv.outputs) row.push_back(o[0]);
    for (const auto& o : jv.outputs)
      for (unsigned j = 1; j <= p; ++j) row.push_back(o.at(j));
    for (const auto& u : jv.inputs)
      for (unsigned j = 0; j <= q; ++j) row.push_back(u.at(j));
    row.insert(row.end(), split.truth[d].begin(), split.truth[d].end());
    row.insert(row.end(), split.noisy[d].begin(), split.noisy[d].end());
    t.add_row(row);
  }
  return t;
}

inline SplitData split_from_csv(const CsvTable& t, const Scenario& s, unsigned p, unsigned q) {
  const auto& m = s.model;
  SplitData split;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    split.t.push_back(t.number(r, t.column("t")));
    JetValues jv;
    for (std::size_t k = 0; k < m.num_outputs(); ++k) {
      const std::string y = "y" + std::to_string(k + 1);
      jv.outputs.push_back({t.number(r, t.column(y))});
      for (unsigned j = 1; j <= p; ++j) jv.outputs.back().push_back(t.number(r, t.column("d" + y + "_" + std::to_string(j))));
    }
    for (std::size_t l = 0; l < m.num_inputs(); ++l) {
      jv.inputs.emplace_back();
      for (unsigned j = 0; j <= q; ++j)
        jv.inputs.back().push_back(
            t.number(r, t.column(j == 0 ? m.input_names[l] : "d" + m.input_names[l] + "_" + std::to_string(j))));
    }
    split.jets.push_back(std::move(jv));
    std::vector<double> truth;
    for (const auto& name : m.state_names) truth.push_back(t.number(r, t.column("truth_" + name)));
    split.truth.push_back(std::move(truth));
    std::vector<double> noisy;
    for (const auto& name : m.state_names) noisy.push_back(t.number(r, t.column("noisy_" + name)));
    split.noisy.push_back(std::move(noisy));
  }
  return split;
}

inline nlohmann::json dataset_manifest(const Dataset& d) {
  return {{"scenario", d.scenario},
          {"unknown", d.unknown},
          {"drop_r0", d.drop_r0},
          {"sigma", d.sigma},
          {"seed", d.seed},
          {"symmetric_noise", d.symmetric_noise},
          {"output_order", d.output_order},
          {"input_order", d.input_order},
          {"sizes", {{"train", d.train.size()}, {"val", d.val.size()}, {"test", d.test.size()}}}};
}

inline Scenario scenario_of(const Dataset& d) { return make_scenario(d.scenario, {d.unknown, d.drop_r0}); }

inline void save_dataset(const Dataset& d, const std::filesystem::path& dir) {
  const Scenario s = scenario_of(d);
  write_text(dir / "manifest.json", dataset_manifest(d).dump(2) + "\n");
  write_text(dir / "train.csv", split_to_csv(d.train, s, d.output_order, d.input_order).to_string());
  write_text(dir / "val.csv", split_to_csv(d.val, s, d.output_order, d.input_order).to_string());
  write_text(dir / "test.csv", split_to_csv(d.test, s, d.output_order, d.input_order).to_string());
}

inline Dataset load_dataset(const std::filesystem::path& dir) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text(dir / "manifest.json"));
  } catch (const nlohmann::json::exception& e) {
    throw IOError("invalid dataset manifest: " + std::string(e.what()));
  }
  Dataset d;
  d.scenario = j.at("scenario").get<std::string>();
  d.unknown = j.at("unknown").get<std::vector<std::string>>();
  d.drop_r0 = j.at("drop_r0").get<bool>();
  d.sigma = j.at("sigma").get<double>();
  d.seed = j.at("seed").get<std::uint64_t>();
  d.symmetric_noise = j.at("symmetric_noise").get<bool>();
  d.output_order = j.at("output_order").get<unsigned>();
  d.input_order = j.at("input_order").get<unsigned>();
  const Scenario s = scenario_of(d);
  d.train = split_from_csv(CsvTable::parse(read_text(dir / "train.csv")), s, d.output_order, d.input_order);
  d.val = split_from_csv(CsvTable::parse(read_text(dir / "val.csv")), s, d.output_order, d.input_order);
  d.test = split_from_csv(CsvTable::parse(read_text(dir / "test.csv")), s, d.output_order, d.input_order);
  return d;
}

}  // namespace obspinn
