#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "obspinn/bayesopt/bayesopt.hpp"
#include "obspinn/training/losses.hpp"

namespace obspinn {

enum class Mode { baseline, reference, proposed };

inline std::string to_string(Mode m) {
  switch (m) {
    case Mode::baseline: return "baseline";
    case Mode::reference: return "reference";
    case Mode::proposed: return "proposed";
  }
  return "?";
}

inline Mode parse_mode(const std::string& s) {
  if (s == "baseline") return Mode::baseline;
  if (s == "reference") return Mode::reference;
  if (s == "proposed") return Mode::proposed;
  throw InvalidModel("unknown mode '" + s + "' (expected baseline, reference or proposed)");
}

struct TrainConfig {
  Mode mode = Mode::proposed;
  std::size_t epochs = 30000;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  LossWeights weights;
  std::size_t iterations = 0;   // BO budget S; 0 selects the scenario default
  std::size_t eval_every = 10;  // validation loss stride for checkpoint selection
  std::size_t hidden = 50, layers = 3;
  std::string profile = "full";

  static TrainConfig desk() {
    TrainConfig c;
    c.epochs = 5000;
    c.iterations = 10;
    c.profile = "desk";
    return c;
  }
  static TrainConfig full() { return {}; }
  static TrainConfig profile_named(const std::string& name) {
    if (name == "desk") return desk();
    if (name == "full") return full();
    throw InvalidModel("unknown profile '" + name + "' (expected desk or full)");
  }

  std::size_t budget(const Scenario& s) const { return iterations ? iterations : s.default_iterations; }
};

struct EpochRecord {
  std::size_t epoch = 0;
  LossParts parts;
};

/// One optimization run of the network (and, for the baseline, of θ).
struct Session {
  Mlp net;
  std::vector<double> theta;  // full parameter vector at the selected checkpoint
  std::vector<EpochRecord> trace;
  std::size_t best_epoch = 0;
  double best_val = std::numeric_limits<double>::infinity();
  LossParts best_val_parts;
};

struct TrainOutcome {
  Mode mode = Mode::proposed;
  Mlp net;
  std::vector<double> theta;          // full parameter vector θ̂
  std::vector<double> theta_unknown;  // estimated entries only
  std::vector<EpochRecord> trace;     // loss trace of the selected session
  std::vector<BoRecord> history;      // E_val per candidate (Algorithm 1 only)
  std::size_t s_star = 0;
  std::size_t best_epoch = 0;
  double best_val = 0.0;
  std::size_t excluded_train = 0, excluded_val = 0;
  std::vector<std::string> log;
};

namespace detail {

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), static_cast<std::uint32_t>(stream)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

enum Stream : std::uint64_t { network_init = 1, theta_init = 2, bayesopt = 3 };

/// Adam on θ_nn (and on the unknown parameters when `learn` is nonempty).
/// The checkpoint with the smallest validation loss is kept.
inline Session run_session(const Scenario& s, const Dataset& d, std::vector<double> theta, const std::vector<std::size_t>& learn,
                           const Augmentation* aug_train, const Augmentation* aug_val, const TrainConfig& cfg) {
  Session out;
  Mlp net = Mlp::pinn(s.model.num_states(), s.T, cfg.hidden, cfg.layers);
  net.glorot_init(derive_seed(cfg.seed, network_init));
  const PinnLoss train_loss(s, d.train, cfg.weights, aug_train);
  const PinnLoss val_loss(s, d.val, cfg.weights, aug_val);
  Adam adam(cfg.lr);
  std::vector<double> params = net.params();
  params.reserve(params.size() + learn.size());
  for (auto k : learn) params.push_back(theta[k]);
  const std::size_t nn = net.num_params();
  out.trace.reserve(cfg.epochs);

  for (std::size_t epoch = 0;; ++epoch) {
    std::copy(params.begin(), params.begin() + static_cast<std::ptrdiff_t>(nn), net.params().begin());
    for (std::size_t j = 0; j < learn.size(); ++j) theta[learn[j]] = params[nn + j];
    if (epoch % cfg.eval_every == 0 || epoch == cfg.epochs) {
      const auto vp = val_loss.parts(net, theta);
      if (vp.total < out.best_val) {
        out.best_val = vp.total;
        out.best_val_parts = vp;
        out.best_epoch = epoch;
        out.net = net;
        out.theta = theta;
      }
    }
    if (epoch == cfg.epochs) break;
    LossParts parts;
    const auto lg = loss_gradient(net, train_loss.times(), theta, [&](Tape& t, const NetworkLeaves& v) { return train_loss(t, v, &parts); });
    if (!std::isfinite(lg.value)) throw NonFiniteLoss("training loss is not finite at epoch " + std::to_string(epoch));
    out.trace.push_back({epoch, parts});
    std::vector<double> grad = lg.network;
    for (auto k : learn) grad.push_back(lg.theta[k]);
    adam.step(params, grad);
  }
  if (!std::isfinite(out.best_val)) throw NonFiniteLoss("validation loss never finite");
  return out;
}

}  // namespace detail

/// Joint optimization of θ_nn and the unknown parameters from a uniform
/// draw in the search box. No augmented data.
inline TrainOutcome train_baseline(const Scenario& s, const Dataset& d, const TrainConfig& cfg) {
  std::mt19937_64 rng(detail::derive_seed(cfg.seed, detail::theta_init));
  std::uniform_real_distribution<double> box(s.box_low, s.box_high);
  std::vector<double> start;
  for (std::size_t j = 0; j < s.unknown.size(); ++j) start.push_back(box(rng));
  auto session = detail::run_session(s, d, s.theta_with(start), s.unknown, nullptr, nullptr, cfg);
  TrainOutcome out;
  out.mode = Mode::baseline;
  out.net = std::move(session.net);
  out.theta = session.theta;
  for (auto k : s.unknown) out.theta_unknown.push_back(session.theta[k]);
  out.trace = std::move(session.trace);
  out.best_epoch = session.best_epoch;
  out.best_val = session.best_val;
  return out;
}

struct FixedThetaResult {
  Session session;
  double e_val = 0.0;
  std::size_t excluded_train = 0, excluded_val = 0;
};

/// Trains θ_nn with the unknown parameters fixed at `theta_unknown`.
/// E_val is the same loss form on the validation split.
inline FixedThetaResult train_fixed_theta(const Scenario& s, const Dataset& d, const std::vector<double>& theta_unknown, bool augmented,
                                          const std::vector<ReconstructionExpr>& formulas, const TrainConfig& cfg) {
  for (double v : theta_unknown)
    if (!(v >= s.box_low && v <= s.box_high)) throw InvalidModel("candidate parameter outside the search box");
  const auto theta = s.theta_with(theta_unknown);
  std::optional<Augmentation> aug_train, aug_val;
  if (augmented) {
    aug_train = augment(formulas, d.train, theta);
    aug_val = augment(formulas, d.val, theta);
  }
  FixedThetaResult r;
  r.session = detail::run_session(s, d, theta, {}, aug_train ? &*aug_train : nullptr, aug_val ? &*aug_val : nullptr, cfg);
  r.e_val = r.session.best_val;
  if (augmented) {
    r.excluded_train = aug_train->excluded;
    r.excluded_val = aug_val->excluded;
  }
  return r;
}

/// BO over the unknown parameters; every candidate trains a fresh network
/// from the same initialization. Reference mode skips the augmented data.
inline TrainOutcome run_algorithm1(const Scenario& s, const Dataset& d, const TrainConfig& cfg) {
  if (cfg.mode == Mode::baseline) throw InvalidModel("Algorithm 1 runs in reference or proposed mode");
  const bool augmented = cfg.mode == Mode::proposed;
  const auto formulas = augmented ? reconstruction_formulas(s) : std::vector<ReconstructionExpr>{};
  BoConfig bc;
  bc.budget = cfg.budget(s);
  bc.seed = detail::derive_seed(cfg.seed, detail::bayesopt);
  BayesOpt bo(std::vector<double>(s.unknown.size(), s.box_low), std::vector<double>(s.unknown.size(), s.box_high), bc);
  TrainOutcome out;
  out.mode = cfg.mode;
  std::optional<FixedThetaResult> best;
  while (!bo.exhausted()) {
    const auto candidate = bo.suggest();
    double e_val = std::numeric_limits<double>::infinity();
    try {
      auto r = train_fixed_theta(s, d, candidate, augmented, formulas, cfg);
      e_val = r.e_val;
      if (!best || e_val < best->e_val) best = std::move(r);
    } catch (const NonFiniteLoss& e) {
      out.log.push_back("candidate " + std::to_string(bo.history().size() + 1) + ": " + e.what());
    }
    bo.observe(candidate, e_val);
  }
  for (const auto& line : bo.log()) out.log.push_back(line);
  out.history = bo.history();
  out.s_star = bo.best_index();
  if (!best) throw NonFiniteLoss("every candidate produced a non-finite loss");
  out.theta_unknown = out.history[out.s_star].x;
  out.theta = s.theta_with(out.theta_unknown);
  out.net = std::move(best->session.net);
  out.trace = std::move(best->session.trace);
  out.best_epoch = best->session.best_epoch;
  out.best_val = best->e_val;
  out.excluded_train = best->excluded_train;
  out.excluded_val = best->excluded_val;
  return out;
}

/// Dispatches on the configured mode.
inline TrainOutcome train(const Scenario& s, const Dataset& d, const TrainConfig& cfg) {
  return cfg.mode == Mode::baseline ? train_baseline(s, d, cfg) : run_algorithm1(s, d, cfg);
}

}  // namespace obspinn
