#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "obspinn/error.hpp"

namespace obspinn {

/// Fully connected tanh network t -> x_nn(t) in R^N. The input is t / T.
/// Parameters are one flat vector: for each layer the row-major weight
/// matrix (out x in) followed by the bias.
class Mlp {
 public:
  using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using ColMatrix = Eigen::MatrixXd;

  Mlp() = default;

  Mlp(std::vector<std::size_t> widths, double time_scale) : widths_(std::move(widths)), time_scale_(time_scale) {
    if (widths_.size() < 2 || widths_.front() != 1) throw InvalidModel("network must map one input to outputs");
    if (!(time_scale_ > 0.0)) throw InvalidModel("time scale must be positive");
    std::size_t total = 0;
    for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
      offsets_.push_back(total);
      total += widths_[l + 1] * widths_[l] + widths_[l + 1];
    }
    params_.assign(total, 0.0);
  }

  /// 1 -> 50 -> 50 -> 50 -> N.
  static Mlp pinn(std::size_t outputs, double time_scale = 200.0, std::size_t hidden = 50, std::size_t layers = 3) {
    std::vector<std::size_t> w{1};
    for (std::size_t k = 0; k < layers; ++k) w.push_back(hidden);
    w.push_back(outputs);
    return Mlp(w, time_scale);
  }

  /// Weights uniform in ±sqrt(6 / (fan_in + fan_out)), biases zero.
  void glorot_init(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (std::size_t l = 0; l < num_layers(); ++l) {
      const double a = std::sqrt(6.0 / static_cast<double>(widths_[l] + widths_[l + 1]));
      std::uniform_real_distribution<double> dist(-a, a);
      auto W = weights(l);
      for (Eigen::Index r = 0; r < W.rows(); ++r)
        for (Eigen::Index c = 0; c < W.cols(); ++c) W(r, c) = dist(rng);
      bias(l).setZero();
    }
  }

  std::size_t num_layers() const { return widths_.size() - 1; }
  std::size_t num_outputs() const { return widths_.back(); }
  std::size_t num_params() const { return params_.size(); }
  const std::vector<std::size_t>& widths() const { return widths_; }
  double time_scale() const { return time_scale_; }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  Eigen::Map<Matrix> weights(std::size_t l) {
    return {params_.data() + offsets_[l], static_cast<Eigen::Index>(widths_[l + 1]), static_cast<Eigen::Index>(widths_[l])};
  }
  Eigen::Map<const Matrix> weights(std::size_t l) const {
    return {params_.data() + offsets_[l], static_cast<Eigen::Index>(widths_[l + 1]), static_cast<Eigen::Index>(widths_[l])};
  }
  Eigen::Map<Eigen::VectorXd> bias(std::size_t l) {
    return {params_.data() + offsets_[l] + widths_[l + 1] * widths_[l], static_cast<Eigen::Index>(widths_[l + 1])};
  }
  Eigen::Map<const Eigen::VectorXd> bias(std::size_t l) const {
    return {params_.data() + offsets_[l] + widths_[l + 1] * widths_[l], static_cast<Eigen::Index>(widths_[l + 1])};
  }

  /// Activations and their time tangents for a batch of times; columns are
  /// time points. Kept for the reverse pass.
  struct Pass {
    std::vector<double> times;
    std::vector<ColMatrix> a;   // a[0] = t / T, a[l] = tanh(z_l), last = x
    std::vector<ColMatrix> da;  // d a / dt
    std::vector<ColMatrix> dz;  // d z / dt of each hidden layer
    const ColMatrix& x() const { return a.back(); }
    const ColMatrix& dx() const { return da.back(); }
  };

  Pass forward_pass(const std::vector<double>& times) const {
    const auto B = static_cast<Eigen::Index>(times.size());
    Pass p;
    p.times = times;
    p.a.emplace_back(1, B);
    p.da.emplace_back(ColMatrix::Constant(1, B, 1.0 / time_scale_));
    for (Eigen::Index j = 0; j < B; ++j) p.a[0](0, j) = times[static_cast<std::size_t>(j)] / time_scale_;
    for (std::size_t l = 0; l < num_layers(); ++l) {
      const auto W = weights(l);
      ColMatrix z = W * p.a[l];
      z.colwise() += bias(l);
      ColMatrix dz = W * p.da[l];
      if (l + 1 == num_layers()) {
        p.a.push_back(std::move(z));
        p.da.push_back(std::move(dz));
      } else {
        ColMatrix h = z.array().tanh().matrix();
        ColMatrix dh = ((1.0 - h.array().square()) * dz.array()).matrix();
        p.a.push_back(std::move(h));
        p.da.push_back(std::move(dh));
        p.dz.push_back(std::move(dz));
      }
    }
    return p;
  }

  /// Accumulates dL/dθ_nn into `grad` given gx = dL/dx and gdx = dL/dẋ
  /// (both N x B) for the batch in `p`.
  void backward(const Pass& p, const ColMatrix& gx, const ColMatrix& gdx, std::vector<double>& grad) const {
    if (grad.size() != params_.size()) grad.assign(params_.size(), 0.0);
    ColMatrix g = gx, gd = gdx;  // gradients w.r.t. the current layer's z and dz
    for (std::size_t l = num_layers(); l-- > 0;) {
      const auto W = weights(l);
      Eigen::Map<Matrix> gW(grad.data() + offsets_[l], W.rows(), W.cols());
      Eigen::Map<Eigen::VectorXd> gb(grad.data() + offsets_[l] + widths_[l + 1] * widths_[l], W.rows());
      gW.noalias() += g * p.a[l].transpose();
      gW.noalias() += gd * p.da[l].transpose();
      gb += g.rowwise().sum();
      if (l == 0) break;
      ColMatrix ga = W.transpose() * g;
      ColMatrix gda = W.transpose() * gd;
      // a = tanh(z), da = s * dz with s = 1 - a^2.
      const auto& h = p.a[l];
      const Eigen::ArrayXXd s = 1.0 - h.array().square();
      const Eigen::ArrayXXd gs = gda.array() * p.dz[l - 1].array();
      g = ((ga.array() - 2.0 * h.array() * gs) * s).matrix();
      gd = (gda.array() * s).matrix();
    }
  }

  std::vector<double> forward(double t) const {
    const auto p = forward_pass({t});
    return {p.x().data(), p.x().data() + p.x().size()};
  }
  std::vector<double> forward_dt(double t) const {
    const auto p = forward_pass({t});
    return {p.dx().data(), p.dx().data() + p.dx().size()};
  }

  nlohmann::json to_json() const {
    nlohmann::json layers = nlohmann::json::array();
    for (std::size_t l = 0; l < num_layers(); ++l) {
      const auto W = weights(l);
      const auto b = bias(l);
      layers.push_back({{"shape", {W.rows(), W.cols()}},
                        {"weights", std::vector<double>(W.data(), W.data() + W.size())},
                        {"bias", std::vector<double>(b.data(), b.data() + b.size())}});
    }
    return {{"format", "obspinn-mlp"}, {"version", 1}, {"time_scale", time_scale_}, {"widths", widths_}, {"layers", layers}};
  }

  static Mlp from_json(const nlohmann::json& j) {
    try {
      if (j.at("format") != "obspinn-mlp" || j.at("version") != 1) throw IOError("unsupported checkpoint format");
      Mlp m(j.at("widths").get<std::vector<std::size_t>>(), j.at("time_scale").get<double>());
      const auto& layers = j.at("layers");
      if (layers.size() != m.num_layers()) throw IOError("checkpoint layer count mismatch");
      for (std::size_t l = 0; l < m.num_layers(); ++l) {
        const auto w = layers[l].at("weights").get<std::vector<double>>();
        const auto b = layers[l].at("bias").get<std::vector<double>>();
        auto W = m.weights(l);
        auto B = m.bias(l);
        if (w.size() != static_cast<std::size_t>(W.size()) || b.size() != static_cast<std::size_t>(B.size()))
          throw IOError("checkpoint tensor shape mismatch");
        std::copy(w.begin(), w.end(), W.data());
        std::copy(b.begin(), b.end(), B.data());
      }
      return m;
    } catch (const nlohmann::json::exception& e) {
      throw IOError(std::string("invalid checkpoint: ") + e.what());
    }
  }

 private:
  std::vector<std::size_t> widths_;
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
  double time_scale_ = 1.0;
};

/// Standard Adam with bias-corrected moments.
class Adam {
 public:
  explicit Adam(double lr = 1e-3, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(std::vector<double>& params, const std::vector<double>& grad) {
    if (m_.empty()) {
      m_.assign(params.size(), 0.0);
      v_.assign(params.size(), 0.0);
    }
    if (grad.size() != params.size() || m_.size() != params.size()) throw InvalidModel("Adam shape mismatch");
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t k = 0; k < params.size(); ++k) {
      m_[k] = beta1_ * m_[k] + (1.0 - beta1_) * grad[k];
      v_[k] = beta2_ * v_[k] + (1.0 - beta2_) * grad[k] * grad[k];
      params[k] -= lr_ * (m_[k] / c1) / (std::sqrt(v_[k] / c2) + eps_);
    }
  }

  double lr() const { return lr_; }
  std::uint64_t steps() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  std::uint64_t t_ = 0;
  std::vector<double> m_, v_;
};

}  // namespace obspinn
