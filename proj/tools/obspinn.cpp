// obspinn command-line driver.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "obspinn/report/report.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace obspinn;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitNothingToAugment = 2;

/// Flags as parsed; unset ones fall back to the config file, then to the
/// profile defaults.
struct Flags {
  std::string config, out, profile, scenario, model, mode, data, checkpoint;
  std::optional<std::uint64_t> seed;
  std::optional<double> sigma, lr;
  std::optional<std::size_t> epochs, iterations, output;
  std::vector<std::string> unknown;
  bool drop_r0 = false, symmetric_noise = false;
};

struct RunConfig {
  std::string command;
  std::string scenario = "seir";
  std::string model;  // path of a user model (analyze only)
  std::string mode = "proposed";
  std::string profile = "full";
  std::string out;
  std::string data;
  std::string checkpoint;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::string> unknown;
  bool drop_r0 = false;
  bool symmetric_noise = false;
  std::size_t output = 1;
  TrainConfig train;

  json to_json() const {
    return {{"command", command},
            {"scenario", scenario},
            {"model", model},
            {"mode", mode},
            {"profile", profile},
            {"out", out},
            {"data", data},
            {"checkpoint", checkpoint},
            {"sigma", sigma},
            {"seed", seed},
            {"unknown", unknown},
            {"drop_r0", drop_r0},
            {"symmetric_noise", symmetric_noise},
            {"output", output},
            {"epochs", train.epochs},
            {"iterations", train.iterations},
            {"lr", train.lr},
            {"eval_every", train.eval_every},
            {"hidden", train.hidden},
            {"layers", train.layers},
            {"weights", {{"eq", train.weights.eq}, {"init", train.weights.init}, {"data", train.weights.data}}},
            {"notes",
             {{"checkpoint_selection", "minimum validation loss"},
              {"input_scaling", "t / T"},
              {"noise", symmetric_noise ? "uniform [-sigma/2, sigma/2] per state" : "uniform [0, sigma] per state"},
              {"bayesopt", "squared-exponential kernel, length scale 0.1 x box, log objective, 5 initial points, EI over 1024 candidates"}}}};
  }
};

template <class T>
void take(const json& j, const char* key, T& into) {
  if (j.contains(key) && !j.at(key).is_null()) into = j.at(key).get<T>();
}

RunConfig resolve(const std::string& command, const Flags& f) {
  json file = json::object();
  if (!f.config.empty()) {
    try {
      file = json::parse(read_text(f.config));
    } catch (const json::exception& e) {
      throw IOError("cannot parse config " + f.config + ": " + e.what());
    }
  }
  RunConfig c;
  c.command = command;
  std::string profile = "full";
  take(file, "profile", profile);
  if (!f.profile.empty()) profile = f.profile;
  c.profile = profile;
  c.train = TrainConfig::profile_named(profile);
  try {
    take(file, "scenario", c.scenario);
    take(file, "model", c.model);
    take(file, "mode", c.mode);
    take(file, "out", c.out);
    take(file, "data", c.data);
    take(file, "checkpoint", c.checkpoint);
    take(file, "sigma", c.sigma);
    take(file, "seed", c.seed);
    take(file, "unknown", c.unknown);
    take(file, "drop_r0", c.drop_r0);
    take(file, "symmetric_noise", c.symmetric_noise);
    take(file, "output", c.output);
    take(file, "epochs", c.train.epochs);
    take(file, "iterations", c.train.iterations);
    take(file, "lr", c.train.lr);
    take(file, "eval_every", c.train.eval_every);
    take(file, "hidden", c.train.hidden);
    take(file, "layers", c.train.layers);
    if (file.contains("weights")) {
      take(file["weights"], "eq", c.train.weights.eq);
      take(file["weights"], "init", c.train.weights.init);
      take(file["weights"], "data", c.train.weights.data);
    }
  } catch (const json::exception& e) {
    throw IOError(std::string("invalid config value: ") + e.what());
  }
  if (!f.scenario.empty()) c.scenario = f.scenario;
  if (!f.model.empty()) c.model = f.model;
  if (!f.mode.empty()) c.mode = f.mode;
  if (!f.out.empty()) c.out = f.out;
  if (!f.data.empty()) c.data = f.data;
  if (!f.checkpoint.empty()) c.checkpoint = f.checkpoint;
  if (f.sigma) c.sigma = *f.sigma;
  if (f.seed) c.seed = *f.seed;
  if (!f.unknown.empty()) c.unknown = f.unknown;
  if (f.drop_r0) c.drop_r0 = true;
  if (f.symmetric_noise) c.symmetric_noise = true;
  if (f.output) c.output = *f.output;
  if (f.epochs) c.train.epochs = *f.epochs;
  if (f.iterations) c.train.iterations = *f.iterations;
  if (f.lr) c.train.lr = *f.lr;
  c.train.mode = parse_mode(c.mode);
  c.train.seed = c.seed;
  c.train.profile = c.profile;
  if (c.train.eval_every == 0) throw InvalidModel("eval_every must be positive");
  if (c.out.empty()) c.out = "runs/" + command + "-" + c.scenario + "-" + c.mode + "-seed" + std::to_string(c.seed);
  return c;
}

Scenario scenario_for(const RunConfig& c) { return make_scenario(c.scenario, {c.unknown, c.drop_r0}); }

void prepare_run_dir(RunConfig& c, const Scenario* s) {
  const fs::path dir(c.out);
  if (fs::exists(dir) && !fs::is_empty(dir)) throw IOError("run directory " + dir.string() + " already exists and is not empty");
  fs::create_directories(dir);
  if (s) {
    c.unknown = s->unknown_names();
    if (c.train.iterations == 0) c.train.iterations = s->default_iterations;
  }
  write_text(dir / "config.json", c.to_json().dump(2) + "\n");
}

void print_metrics(const std::vector<MetricRow>& rows) {
  for (const auto& r : rows)
    std::printf("%-4s %-8s %-5s %.6g\n", r.metric.c_str(), r.target.c_str(), r.split.c_str(), r.value);
}

std::string set_string(const ModelSpec& m, const std::vector<std::size_t>& idx) {
  std::string out = "{";
  for (std::size_t k = 0; k < idx.size(); ++k) out += (k ? ", " : "") + m.state_names[idx[k]];
  return out + "}";
}

int cmd_analyze(const RunConfig& c) {
  ModelSpec m;
  if (!c.model.empty()) m = parse_model(read_text(c.model));
  else m = scenario_for(c).analysis;
  if (c.output == 0 || c.output > m.num_outputs()) throw InvalidModel("output index out of range");
  AnalysisOptions opt;
  opt.outputs = {c.output - 1};
  const auto result = analyze_all(m, opt);
  const auto& sys = result.system;
  const auto namer = sys.namer();
  std::printf("states: %s\n", set_string(sys, [&] {
                std::vector<std::size_t> all(sys.num_states());
                for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
                return all;
              }()).c_str());
  std::printf("output: y%zu = %s\n", c.output, sys.measurements[result.output].to_string(namer).c_str());
  for (const auto& st : result.states) {
    if (!st.observable()) {
      std::printf("%s: unobservable (%s)\n", st.name.c_str(), st.reason.c_str());
      continue;
    }
    const auto& cert = *st.certificate;
    std::printf("%s: observable, degree %u, output jets up to %u, input jets up to %u\n", st.name.c_str(), cert.degree, cert.output_order,
                cert.input_order);
    std::printf("  H = %s\n", cert.polynomial.to_string(namer).c_str());
    if (cert.degree == 1) {
      const auto e = reconstruction(st);
      std::printf("  %s = (%s) / (%s)\n", st.name.c_str(), e.numerator.to_string(namer).c_str(), e.denominator.to_string(namer).c_str());
    }
  }
  const auto A = result.observable_set();
  std::printf("observable: %s\n", set_string(sys, A).c_str());
  std::printf("unobservable: %s\n", set_string(sys, result.unobservable_set()).c_str());
  return A.empty() ? kExitNothingToAugment : kExitOk;
}

int cmd_simulate(RunConfig c) {
  const auto s = scenario_for(c);
  prepare_run_dir(c, &s);
  const auto traj = simulate_truth(s);
  CsvTable t;
  t.header.push_back("t");
  for (const auto& n : s.model.state_names) t.header.push_back(n);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    std::vector<double> row{traj.times[k]};
    row.insert(row.end(), traj.states[k].begin(), traj.states[k].end());
    t.add_row(row);
  }
  write_text(fs::path(c.out) / "trajectory.csv", t.to_string());
  std::printf("wrote %zu rows to %s\n", traj.size(), (fs::path(c.out) / "trajectory.csv").string().c_str());
  return kExitOk;
}

Dataset build_dataset(const RunConfig& c, const Scenario& s) {
  DatasetOptions opt;
  opt.symmetric_noise = c.symmetric_noise;
  return prepare_dataset(s, c.sigma, c.seed, opt);
}

int cmd_dataset(RunConfig c) {
  const auto s = scenario_for(c);
  prepare_run_dir(c, &s);
  const auto d = build_dataset(c, s);
  save_dataset(d, c.out);
  std::printf("dataset written to %s (train %zu, val %zu, test %zu)\n", c.out.c_str(), d.train.size(), d.val.size(), d.test.size());
  return kExitOk;
}

int train_and_report(RunConfig& c, const Dataset& d) {
  const Scenario s = scenario_of(d);
  const auto outcome = train(s, d, c.train);
  const auto rows = emit_report(c.out, s, d, outcome);
  for (const auto& line : outcome.log) std::fprintf(stderr, "%s\n", line.c_str());
  if (outcome.excluded_train)
    std::printf("augmented points excluded (vanishing denominator): train %zu, val %zu\n", outcome.excluded_train, outcome.excluded_val);
  std::printf("estimate:");
  for (std::size_t j = 0; j < s.unknown.size(); ++j)
    std::printf(" %s=%.6g", s.model.param_names[s.unknown[j]].c_str(), outcome.theta_unknown[j]);
  std::printf("\n");
  print_metrics(rows);
  return kExitOk;
}

int cmd_train(RunConfig c) {
  if (c.data.empty()) throw InvalidModel("train needs --data <dataset directory>");
  const auto d = load_dataset(c.data);
  c.scenario = d.scenario;
  c.sigma = d.sigma;
  c.drop_r0 = d.drop_r0;
  c.symmetric_noise = d.symmetric_noise;
  const auto s = scenario_of(d);
  prepare_run_dir(c, &s);
  return train_and_report(c, d);
}

int cmd_reproduce(RunConfig c) {
  const auto s = scenario_for(c);
  prepare_run_dir(c, &s);
  const auto d = build_dataset(c, s);
  save_dataset(d, fs::path(c.out) / "dataset");
  return train_and_report(c, d);
}

int cmd_evaluate(RunConfig c) {
  if (c.checkpoint.empty() || c.data.empty()) throw InvalidModel("evaluate needs --checkpoint <file> and --data <dataset directory>");
  const auto d = load_dataset(c.data);
  const auto ck = Checkpoint::from_json(json::parse(read_text(c.checkpoint)));
  if (ck.scenario != d.scenario || ck.unknown != d.unknown) throw InvalidModel("checkpoint and dataset belong to different problems");
  c.scenario = d.scenario;
  c.mode = ck.mode;
  const auto s = scenario_of(d);
  prepare_run_dir(c, &s);
  print_metrics(write_evaluation(c.out, s, d, ck));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Observability-guided PINN parameter estimation for polynomial ODE models"};
  app.require_subcommand(1);
  Flags f;
  app.add_option("--config", f.config, "JSON file with run settings; flags override it");
  app.add_option("--out", f.out, "Run directory");
  app.add_option("--seed", f.seed, "Random seed");
  app.add_option("--profile", f.profile, "desk or full")->check(CLI::IsMember({"desk", "full"}));

  auto scenario_flags = [&](CLI::App* sub) {
    sub->add_option("--scenario", f.scenario, "seir, sicrd or saird");
    sub->add_option("--unknown", f.unknown, "Parameters to estimate")->delimiter(',');
    sub->add_flag("--drop-r0", f.drop_r0, "SICRD: leave R(0) out of the initial-condition loss");
  };
  auto training_flags = [&](CLI::App* sub) {
    sub->add_option("--mode", f.mode, "baseline, reference or proposed");
    sub->add_option("--epochs", f.epochs, "Adam steps per training run");
    sub->add_option("--iterations", f.iterations, "Bayesian optimization budget S");
    sub->add_option("--lr", f.lr, "Adam learning rate");
  };
  auto noise_flags = [&](CLI::App* sub) {
    sub->add_option("--sigma", f.sigma, "Noise level");
    sub->add_flag("--symmetric-noise", f.symmetric_noise, "Centered noise instead of one-sided");
  };

  auto* analyze = app.add_subcommand("analyze", "Algebraic observability analysis");
  analyze->add_option("--scenario", f.scenario, "seir, sicrd or saird");
  analyze->add_option("--model", f.model, "Model file in the obspinn DSL");
  analyze->add_option("--output", f.output, "Measurement used by the analysis (1-based)");
  analyze->add_option("--unknown", f.unknown, "Parameters treated as unknown")->delimiter(',');
  auto* simulate = app.add_subcommand("simulate", "Integrate a scenario at its true parameters");
  scenario_flags(simulate);
  auto* dataset = app.add_subcommand("dataset", "Generate train, validation and test splits");
  scenario_flags(dataset);
  noise_flags(dataset);
  auto* trainc = app.add_subcommand("train", "Train on an existing dataset directory");
  trainc->add_option("--data", f.data, "Dataset directory")->required();
  training_flags(trainc);
  auto* reproduce = app.add_subcommand("reproduce", "Dataset, analysis, training and report in one run");
  scenario_flags(reproduce);
  noise_flags(reproduce);
  training_flags(reproduce);
  auto* evaluate = app.add_subcommand("evaluate", "Recompute report.csv from a checkpoint and a dataset");
  evaluate->add_option("--checkpoint", f.checkpoint, "checkpoint.json of a run")->required();
  evaluate->add_option("--data", f.data, "Dataset directory")->required();
  for (auto* sub : {analyze, simulate, dataset, trainc, reproduce, evaluate}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    const std::string name = app.get_subcommands().front()->get_name();
    RunConfig c = resolve(name, f);
    if (name == "analyze") return cmd_analyze(c);
    if (name == "simulate") return cmd_simulate(c);
    if (name == "dataset") return cmd_dataset(c);
    if (name == "train") return cmd_train(c);
    if (name == "reproduce") return cmd_reproduce(c);
    if (name == "evaluate") return cmd_evaluate(c);
  } catch (const SyntaxError& e) {
    std::fprintf(stderr, "syntax error: %s\n", e.what());
    return kExitError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitError;
  }
  return kExitError;
}
