#pragma once

#include <vector>

#include "obspinn/neural/network.hpp"
#include "obspinn/neural/tape.hpp"

namespace obspinn {

/// Tape leaves for one batched network evaluation: x_nn and its time
/// derivative at every time point, plus the model parameters.
struct NetworkLeaves {
  std::size_t N = 0, B = 0;
  std::vector<Var> x, dx, theta;  // x and dx are state-major: [i * B + j]

  const Var& X(std::size_t i, std::size_t j) const { return x[i * B + j]; }
  const Var& DX(std::size_t i, std::size_t j) const { return dx[i * B + j]; }
};

struct LossGradient {
  double value = 0.0;
  std::vector<double> network;  // dL/dθ_nn
  std::vector<double> theta;    // dL/dθ
};

namespace detail {

inline NetworkLeaves make_leaves(Tape& tape, const Mlp::Pass& pass, const std::vector<double>& theta) {
  NetworkLeaves leaves;
  leaves.N = static_cast<std::size_t>(pass.x().rows());
  leaves.B = static_cast<std::size_t>(pass.x().cols());
  leaves.x.reserve(leaves.N * leaves.B);
  leaves.dx.reserve(leaves.N * leaves.B);
  for (std::size_t i = 0; i < leaves.N; ++i)
    for (std::size_t j = 0; j < leaves.B; ++j) {
      leaves.x.push_back(tape.variable(pass.x()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))));
      leaves.dx.push_back(tape.variable(pass.dx()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))));
    }
  for (double v : theta) leaves.theta.push_back(tape.variable(v));
  return leaves;
}

}  // namespace detail

/// Evaluates the network at `times`, lets `build(tape, leaves)` assemble a
/// scalar loss, and returns the loss with its gradient. The loss head is
/// differentiated on the tape; the network part by the reverse pass over
/// the dual forward evaluation.
template <class Build>
LossGradient loss_gradient(const Mlp& net, const std::vector<double>& times, const std::vector<double>& theta, Build&& build) {
  const auto pass = net.forward_pass(times);
  Tape tape;
  const NetworkLeaves leaves = detail::make_leaves(tape, pass, theta);

  const Var loss = build(tape, leaves);
  const auto adj = tape.gradient(loss);
  auto adjoint = [&](const Var& v) { return v.is_constant() ? 0.0 : adj[static_cast<std::size_t>(v.id)]; };

  LossGradient out;
  out.value = loss.value;
  Mlp::ColMatrix gx(leaves.N, leaves.B), gdx(leaves.N, leaves.B);
  for (std::size_t i = 0; i < leaves.N; ++i)
    for (std::size_t j = 0; j < leaves.B; ++j) {
      gx(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = adjoint(leaves.X(i, j));
      gdx(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = adjoint(leaves.DX(i, j));
    }
  out.network.assign(net.num_params(), 0.0);
  net.backward(pass, gx, gdx, out.network);
  for (const auto& v : leaves.theta) out.theta.push_back(adjoint(v));
  return out;
}

/// Loss value only; no reverse pass.
template <class Build>
double loss_value(const Mlp& net, const std::vector<double>& times, const std::vector<double>& theta, Build&& build) {
  const auto pass = net.forward_pass(times);
  Tape tape;
  const NetworkLeaves leaves = detail::make_leaves(tape, pass, theta);
  return build(tape, leaves).value;
}

}  // namespace obspinn
