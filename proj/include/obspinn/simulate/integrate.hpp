#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "obspinn/simulate/compiled.hpp"

namespace obspinn {

/// Known input u(t) and its derivatives.
class InputFunction {
 public:
  enum class Kind { none, exp_decay, tabulated };

  InputFunction() = default;

  static InputFunction none() { return {}; }

  /// u(t) = exp(-k t).
  static InputFunction exp_decay(double k) {
    InputFunction f;
    f.kind_ = Kind::exp_decay;
    f.rate_ = k;
    return f;
  }

  /// Piecewise-linear through (times[j], values[j]); constant outside.
  static InputFunction tabulated(std::vector<double> times, std::vector<double> values) {
    if (times.size() != values.size() || times.empty()) throw InvalidModel("tabulated input needs matching, nonempty columns");
    if (!std::is_sorted(times.begin(), times.end())) throw InvalidModel("tabulated input times must be increasing");
    InputFunction f;
    f.kind_ = Kind::tabulated;
    f.times_ = std::move(times);
    f.values_ = std::move(values);
    return f;
  }

  Kind kind() const { return kind_; }
  double rate() const { return rate_; }
  std::size_t size() const { return kind_ == Kind::none ? 0 : 1; }

  /// u^(order)(t).
  double value(double t, unsigned order = 0) const {
    switch (kind_) {
      case Kind::none: throw InvalidModel("model has no input function");
      case Kind::exp_decay: return std::pow(-rate_, static_cast<int>(order)) * std::exp(-rate_ * t);
      case Kind::tabulated: return tabulated_value(t, order);
    }
    return 0.0;
  }

  /// Values of all inputs at t (empty when there is none).
  std::vector<double> values(double t) const {
    if (kind_ == Kind::none) return {};
    return {value(t)};
  }

 private:
  double tabulated_value(double t, unsigned order) const {
    if (order > 1) return 0.0;
    if (times_.size() == 1 || t <= times_.front()) return order == 0 ? values_.front() : 0.0;
    if (t >= times_.back()) return order == 0 ? values_.back() : 0.0;
    const auto hi = static_cast<std::size_t>(std::upper_bound(times_.begin(), times_.end(), t) - times_.begin());
    const std::size_t lo = hi - 1;
    const double slope = (values_[hi] - values_[lo]) / (times_[hi] - times_[lo]);
    return order == 0 ? values_[lo] + slope * (t - times_[lo]) : slope;
  }

  Kind kind_ = Kind::none;
  double rate_ = 0.0;
  std::vector<double> times_, values_;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> states;  // states[j] = x(times[j])
  std::vector<double> theta;
  std::vector<double> x0;
  double dt = 0.0;
  double max_error_estimate = 0.0;  // largest embedded 5(4) step difference

  std::size_t size() const { return times.size(); }
  double horizon() const { return times.empty() ? 0.0 : times.back(); }
};

namespace detail {

struct DormandPrince {
  static constexpr std::array<double, 7> c{0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
  static constexpr double a[7][6] = {
      {},
      {1.0 / 5},
      {3.0 / 40, 9.0 / 40},
      {44.0 / 45, -56.0 / 15, 32.0 / 9},
      {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
      {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
      {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
  };
  static constexpr std::array<double, 7> b5{35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84, 0.0};
  static constexpr std::array<double, 7> b4{5179.0 / 57600,   0.0,          7571.0 / 16695, 393.0 / 640,
                                            -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};
};

}  // namespace detail

/// Fixed-step Dormand-Prince 5(4) integration of the model dynamics on the
/// grid 0, dt, ..., T. The 5th-order solution is propagated.
inline Trajectory integrate(const ModelSpec& m, const std::vector<double>& theta, const std::vector<double>& x0,
                            double T, double dt, const InputFunction& input = {}) {
  if (!(dt > 0.0) || !(T > 0.0)) throw InvalidModel("integration needs positive T and dt");
  if (theta.size() != m.num_params()) throw InvalidModel("parameter vector has the wrong length");
  if (x0.size() != m.num_states()) throw InvalidModel("initial state has the wrong length");
  if (input.size() != m.num_inputs()) throw InvalidModel("input function does not match the model inputs");
  for (double v : theta)
    if (!std::isfinite(v)) throw InvalidModel("parameters must be finite");
  const auto steps = static_cast<std::size_t>(std::llround(T / dt));
  if (std::abs(static_cast<double>(steps) * dt - T) > 1e-9 * T) throw InvalidModel("T must be a multiple of dt");

  using DP = detail::DormandPrince;
  const CompiledSystem sys(m);
  const std::size_t N = m.num_states();
  Trajectory traj;
  traj.theta = theta;
  traj.x0 = x0;
  traj.dt = dt;
  traj.times.reserve(steps + 1);
  traj.states.reserve(steps + 1);
  traj.times.push_back(0.0);
  traj.states.push_back(x0);

  std::vector<double> v = sys.pack(x0.data(), theta, input.values(0.0));
  auto rhs = [&](double t, const std::vector<double>& x, std::vector<double>& out) {
    std::copy(x.begin(), x.end(), v.begin());
    const auto u = input.values(t);
    std::copy(u.begin(), u.end(), v.begin() + static_cast<std::ptrdiff_t>(sys.layout.input(0)));
    for (std::size_t i = 0; i < N; ++i) out[i] = sys.f[i](v.data());
  };

  std::array<std::vector<double>, 7> k;
  for (auto& ki : k) ki.assign(N, 0.0);
  std::vector<double> x = x0, stage(N), next(N);
  for (std::size_t step = 0; step < steps; ++step) {
    const double t = static_cast<double>(step) * dt;
    rhs(t, x, k[0]);
    for (std::size_t s = 1; s < 7; ++s) {
      for (std::size_t i = 0; i < N; ++i) {
        double acc = x[i];
        for (std::size_t j = 0; j < s; ++j) acc += dt * DP::a[s][j] * k[j][i];
        stage[i] = acc;
      }
      rhs(t + DP::c[s] * dt, stage, k[s]);
    }
    double err = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      double hi = 0.0, lo = 0.0;
      for (std::size_t j = 0; j < 7; ++j) {
        hi += DP::b5[j] * k[j][i];
        lo += DP::b4[j] * k[j][i];
      }
      next[i] = x[i] + dt * hi;
      err = std::max(err, std::abs(dt * (hi - lo)));
    }
    const double t_next = static_cast<double>(step + 1) * dt;
    for (double value : next)
      if (!std::isfinite(value)) throw NonFiniteState("state became non-finite at t = " + std::to_string(t_next));
    traj.max_error_estimate = std::max(traj.max_error_estimate, err);
    x = next;
    traj.times.push_back(t_next);
    traj.states.push_back(x);
  }
  return traj;
}

/// State at an arbitrary t in [0, T] by cubic interpolation through the four
/// nearest grid points.
inline std::vector<double> sample(const Trajectory& traj, double t) {
  const std::size_t n = traj.size();
  if (n == 0) throw OutOfDomain("empty trajectory");
  const double T = traj.horizon();
  const double slack = 1e-12 * std::max(1.0, T);
  if (!(t >= -slack && t <= T + slack)) throw OutOfDomain("time " + std::to_string(t) + " outside [0, T]");
  const double pos = std::clamp(t, 0.0, T) / traj.dt;
  const auto nearest = static_cast<std::size_t>(std::llround(pos));
  if (std::abs(pos - static_cast<double>(nearest)) < 1e-9 && nearest < n) return traj.states[nearest];
  if (n < 4) throw OutOfDomain("cubic interpolation needs at least four grid points");
  const auto cell = static_cast<std::ptrdiff_t>(std::floor(pos));
  const auto first = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(cell - 1, 0, static_cast<std::ptrdiff_t>(n) - 4));
  std::array<double, 4> w{};
  for (std::size_t a = 0; a < 4; ++a) {
    double l = 1.0;
    for (std::size_t b = 0; b < 4; ++b)
      if (a != b) l *= (pos - static_cast<double>(first + b)) / static_cast<double>(static_cast<std::ptrdiff_t>(a) - static_cast<std::ptrdiff_t>(b));
    w[a] = l;
  }
  std::vector<double> out(traj.states[0].size(), 0.0);
  for (std::size_t a = 0; a < 4; ++a)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += w[a] * traj.states[first + a][i];
  return out;
}

}  // namespace obspinn
