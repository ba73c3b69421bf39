#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "obspinn/error.hpp"

namespace obspinn {

/// Squared-exponential kernel with fixed hyperparameters.
struct GpKernel {
  std::vector<double> length_scale;  // per dimension
  double signal_variance = 1.0;
  double nugget = 1e-6;  // relative to the signal variance

  double operator()(const std::vector<double>& a, const std::vector<double>& b) const {
    double r2 = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      const double d = (a[k] - b[k]) / length_scale[k];
      r2 += d * d;
    }
    return signal_variance * std::exp(-0.5 * r2);
  }
};

struct GpPrediction {
  double mean = 0.0;
  double stddev = 0.0;
};

/// Exact GP regression with a constant prior mean equal to the sample mean.
class GpPosterior {
 public:
  GpPosterior(std::vector<std::vector<double>> X, std::vector<double> y, GpKernel kernel)
      : X_(std::move(X)), kernel_(std::move(kernel)) {
    if (X_.empty() || X_.size() != y.size()) throw InvalidModel("GP needs matching, nonempty inputs and values");
    const auto m = static_cast<Eigen::Index>(X_.size());
    for (double v : y)
      if (!std::isfinite(v)) throw InvalidModel("GP values must be finite");
    double mu = 0.0;
    for (double v : y) mu += v;
    mu /= static_cast<double>(m);
    prior_mean_ = mu;
    Eigen::MatrixXd K(m, m);
    for (Eigen::Index r = 0; r < m; ++r)
      for (Eigen::Index c = 0; c < m; ++c)
        K(r, c) = kernel_(X_[static_cast<std::size_t>(r)], X_[static_cast<std::size_t>(c)]);
    Eigen::VectorXd centered(m);
    for (Eigen::Index r = 0; r < m; ++r) centered(r) = y[static_cast<std::size_t>(r)] - mu;
    double nugget = kernel_.nugget;
    for (;;) {
      Eigen::MatrixXd Kn = K;
      Kn.diagonal().array() += nugget * kernel_.signal_variance;
      llt_.compute(Kn);
      if (llt_.info() == Eigen::Success) break;
      nugget *= 10.0;
      if (nugget > 1e-2) throw SingularKernel("kernel matrix is not positive definite even with nugget 1e-2");
      log_.push_back("kernel matrix singular; nugget raised to " + std::to_string(nugget));
    }
    used_nugget_ = nugget;
    alpha_ = llt_.solve(centered);
  }

  GpPrediction predict(const std::vector<double>& x) const {
    const auto m = static_cast<Eigen::Index>(X_.size());
    Eigen::VectorXd k(m);
    for (Eigen::Index r = 0; r < m; ++r) k(r) = kernel_(x, X_[static_cast<std::size_t>(r)]);
    const double mean = prior_mean_ + k.dot(alpha_);
    const Eigen::VectorXd v = llt_.matrixL().solve(k);
    const double var = kernel_.signal_variance - v.squaredNorm();
    return {mean, std::sqrt(std::max(var, 0.0))};
  }

  double used_nugget() const { return used_nugget_; }
  const std::vector<std::string>& log() const { return log_; }

 private:
  std::vector<std::vector<double>> X_;
  GpKernel kernel_;
  double prior_mean_ = 0.0;
  double used_nugget_ = 0.0;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd alpha_;
  std::vector<std::string> log_;
};

/// Kernel for a box: length scale 0.1 x width, signal variance = sample
/// variance of the values (1 when they do not vary).
inline GpKernel default_kernel(const std::vector<double>& low, const std::vector<double>& high, const std::vector<double>& y,
                               double nugget = 1e-6) {
  GpKernel k;
  for (std::size_t d = 0; d < low.size(); ++d) k.length_scale.push_back(0.1 * (high[d] - low[d]));
  double mu = 0.0, var = 0.0;
  for (double v : y) mu += v;
  mu /= static_cast<double>(y.size());
  for (double v : y) var += (v - mu) * (v - mu);
  var /= static_cast<double>(y.size());
  k.signal_variance = var > 0.0 ? var : 1.0;
  k.nugget = nugget;
  return k;
}

inline GpPosterior gp_fit(const std::vector<std::vector<double>>& X, const std::vector<double>& y, const std::vector<double>& low,
                          const std::vector<double>& high, double nugget = 1e-6) {
  if (X.empty()) throw InvalidModel("GP needs at least one observation");
  return GpPosterior(X, y, default_kernel(low, high, y, nugget));
}

/// Expected improvement below `best` for a minimization problem.
inline double expected_improvement(double mean, double stddev, double best) {
  if (stddev < 0.0) throw InvalidModel("negative predictive standard deviation");
  const double gain = best - mean;
  if (stddev == 0.0) return std::max(gain, 0.0);
  const double z = gain / stddev;
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
  return std::max(gain * cdf + stddev * pdf, 0.0);
}

struct BoConfig {
  std::size_t budget = 30;      // S
  std::size_t initial = 5;      // uniform draws before the GP is used
  std::size_t candidates = 1024;
  double nugget = 1e-6;
  std::uint64_t seed = 0;
};

struct BoRecord {
  std::vector<double> x;
  double value = 0.0;  // raw objective; +inf for failed evaluations
};

/// Sequential GP-EI minimizer over a box. Objectives are modeled on a log
/// scale; non-finite ones are recorded but left out of the GP.
class BayesOpt {
 public:
  BayesOpt(std::vector<double> low, std::vector<double> high, BoConfig cfg)
      : low_(std::move(low)), high_(std::move(high)), cfg_(cfg), rng_(cfg.seed) {
    if (low_.empty() || low_.size() != high_.size()) throw InvalidModel("search box must be nonempty with matching bounds");
    for (std::size_t d = 0; d < low_.size(); ++d)
      if (!(high_[d] > low_[d])) throw InvalidModel("search box has an empty side");
  }

  std::size_t dimension() const { return low_.size(); }
  const std::vector<BoRecord>& history() const { return history_; }
  const std::vector<std::string>& log() const { return log_; }
  bool exhausted() const { return history_.size() >= cfg_.budget; }

  std::vector<double> suggest() {
    if (exhausted()) throw IterationBudgetExceeded("BO budget of " + std::to_string(cfg_.budget) + " evaluations used");
    std::vector<std::vector<double>> X;
    std::vector<double> y;
    for (const auto& r : history_)
      if (std::isfinite(r.value)) {
        X.push_back(r.x);
        y.push_back(std::log(std::max(r.value, std::numeric_limits<double>::min())));
      }
    if (history_.size() < cfg_.initial || X.empty()) return uniform();
    const GpPosterior gp = gp_fit(X, y, low_, high_, cfg_.nugget);
    for (const auto& line : gp.log()) log_.push_back(line);
    const double best = *std::min_element(y.begin(), y.end());
    std::vector<double> chosen;
    double chosen_ei = -1.0;
    for (std::size_t c = 0; c < cfg_.candidates; ++c) {
      auto x = uniform();
      const auto p = gp.predict(x);
      const double ei = expected_improvement(p.mean, p.stddev, best);
      if (ei > chosen_ei) {
        chosen_ei = ei;
        chosen = std::move(x);
      }
    }
    return chosen;
  }

  void observe(const std::vector<double>& x, double value) {
    if (x.size() != dimension()) throw InvalidModel("observation has the wrong dimension");
    history_.push_back({x, std::isnan(value) ? std::numeric_limits<double>::infinity() : value});
  }

  /// Index of the smallest recorded objective.
  std::size_t best_index() const {
    if (history_.empty()) throw InvalidModel("no observations");
    std::size_t best = 0;
    for (std::size_t s = 1; s < history_.size(); ++s)
      if (history_[s].value < history_[best].value) best = s;
    return best;
  }

 private:
  std::vector<double> uniform() {
    std::vector<double> x(low_.size());
    for (std::size_t d = 0; d < x.size(); ++d) x[d] = std::uniform_real_distribution<double>(low_[d], high_[d])(rng_);
    return x;
  }

  std::vector<double> low_, high_;
  BoConfig cfg_;
  std::mt19937_64 rng_;
  std::vector<BoRecord> history_;
  std::vector<std::string> log_;
};

}  // namespace obspinn
