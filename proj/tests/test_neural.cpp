#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "obspinn/neural/gradient.hpp"

using namespace obspinn;

namespace {

Mlp small_net(std::uint64_t seed, std::size_t outputs = 2) {
  Mlp net({1, 6, 5, outputs}, 200.0);
  net.glorot_init(seed);
  // Nonzero biases so that every parameter is exercised.
  std::mt19937_64 rng(seed + 100);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    auto b = net.bias(l);
    for (Eigen::Index k = 0; k < b.size(); ++k) b(k) = u(rng);
  }
  return net;
}

// Central differences of a scalar function of the parameter vector.
template <class F>
double central_difference(std::vector<double> p, std::size_t k, double h, F&& f) {
  const double p0 = p[k];
  p[k] = p0 + h;
  const double up = f(p);
  p[k] = p0 - h;
  const double down = f(p);
  return (up - down) / (2 * h);
}

void expect_gradient_matches(const std::vector<double>& g, const std::vector<double>& fd, double rel) {
  double scale = 0.0;
  for (double v : fd) scale = std::max(scale, std::abs(v));
  ASSERT_GT(scale, 0.0);
  for (std::size_t k = 0; k < g.size(); ++k)
    EXPECT_LE(std::abs(g[k] - fd[k]), rel * std::max(std::abs(fd[k]), 1e-3 * scale)) << "coordinate " << k;
}

}  // namespace

TEST(Network, GlorotInitialization) {
  auto net = Mlp::pinn(4);
  net.glorot_init(42);
  EXPECT_EQ(net.num_params(), 50u * 1 + 50 + 2 * (50 * 50 + 50) + 4 * 50 + 4);
  const double bound = std::sqrt(6.0 / 51.0);
  EXPECT_NEAR(bound, 0.3430, 5e-5);
  const auto W0 = net.weights(0);
  double widest = 0.0;
  for (Eigen::Index r = 0; r < W0.rows(); ++r) widest = std::max(widest, std::abs(W0(r, 0)));
  EXPECT_LE(widest, bound);
  EXPECT_GT(widest, 0.8 * bound);
  for (std::size_t l = 0; l < net.num_layers(); ++l) EXPECT_TRUE(net.bias(l).isZero());
  auto again = Mlp::pinn(4);
  again.glorot_init(42);
  EXPECT_EQ(net.params(), again.params());
  again.glorot_init(43);
  EXPECT_NE(net.params(), again.params());
}

TEST(Network, ZeroWeights) {
  Mlp net({1, 50, 50, 50, 3}, 200.0);
  net.bias(3) << 0.5, -1.0, 2.0;
  EXPECT_EQ(net.forward(17.0), (std::vector<double>{0.5, -1.0, 2.0}));
  EXPECT_EQ(net.forward_dt(17.0), (std::vector<double>{0.0, 0.0, 0.0}));
}

TEST(Network, LinearLayerDerivative) {
  Mlp net({1, 1}, 200.0);
  net.weights(0)(0, 0) = 0.7;
  net.bias(0)(0) = 0.1;
  EXPECT_EQ(net.forward_dt(3.0)[0], 0.7 / 200.0);
  EXPECT_DOUBLE_EQ(net.forward(100.0)[0], 0.7 * 0.5 + 0.1);
}

TEST(Network, OutputsFiniteOnHorizon) {
  auto net = Mlp::pinn(5);
  net.glorot_init(1);
  std::vector<double> t;
  for (int k = 0; k <= 200; ++k) t.push_back(k);
  const auto p = net.forward_pass(t);
  EXPECT_TRUE(p.x().allFinite());
  EXPECT_TRUE(p.dx().allFinite());
}

TEST(Network, TimeDerivativeMatchesFiniteDifferences) {
  auto net = Mlp::pinn(4);
  net.glorot_init(9);
  const double h = 1e-5;
  for (double t : {0.0, 13.7, 100.0, 199.0}) {
    const auto d = net.forward_dt(t);
    const auto up = net.forward(t + h), down = net.forward(t - h);
    double scale = 0.0;
    for (std::size_t i = 0; i < 4; ++i) scale = std::max(scale, std::abs(up[i] - down[i]) / (2 * h));
    for (std::size_t i = 0; i < 4; ++i) {
      const double fd = (up[i] - down[i]) / (2 * h);
      EXPECT_LE(std::abs(d[i] - fd), 1e-6 * std::max(std::abs(fd), 1e-2 * scale)) << t << " " << i;
    }
  }
}

TEST(Network, BatchMatchesPointwise) {
  auto net = Mlp::pinn(3);
  net.glorot_init(5);
  const std::vector<double> t{0.0, 50.0, 150.0};
  const auto p = net.forward_pass(t);
  for (std::size_t j = 0; j < t.size(); ++j) {
    const auto x = net.forward(t[j]);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(p.x()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)), x[i], 1e-14);
  }
}

TEST(Network, OutputGradientMatchesFiniteDifferences) {
  // L = x_0(t0)^2: dL/dθ = 2 x_0 dx_0/dθ.
  auto net = small_net(3, 1);
  const std::vector<double> t{37.0};
  const auto lg = loss_gradient(net, t, {}, [](Tape&, const NetworkLeaves& v) { return square(v.X(0, 0)); });
  std::vector<double> fd;
  for (std::size_t k = 0; k < net.num_params(); ++k)
    fd.push_back(central_difference(net.params(), k, 1e-6, [&](const std::vector<double>& p) {
      Mlp m = net;
      m.params() = p;
      const double x = m.forward(37.0)[0];
      return x * x;
    }));
  expect_gradient_matches(lg.network, fd, 1e-5);
}

namespace {

// A loss that mixes x, ẋ, θ and every supported primitive.
Var mixed_loss(Tape& tape, const NetworkLeaves& v) {
  std::vector<Var> residuals;
  for (std::size_t j = 0; j < v.B; ++j) {
    const Var r = v.DX(0, j) - v.theta[0] * v.X(0, j) * v.X(1, j) + v.theta[1] * v.X(1, j);
    residuals.push_back(square(r));
    residuals.push_back(tape.pow(v.DX(1, j) - 0.01 * v.X(0, j), 2));
  }
  const Var eq = tape.mean(residuals);
  const Var init = square(v.X(0, 0) - 0.9) + tape.pow(v.X(1, 0), 4);
  const Var shaped = tape.apply("tanh", std::vector<Var>{v.X(1, v.B - 1) * v.theta[1]});
  return eq + init + 0.5 * shaped;
}

}  // namespace

TEST(LossGradient, MatchesFiniteDifferencesWithTimeDerivatives) {
  std::size_t checked = 0;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto net = small_net(seed);
    const std::vector<double> t{0.0, 20.0, 45.5, 120.0, 200.0};
    const std::vector<double> theta{0.26, 0.1};
    const auto lg = loss_gradient(net, t, theta, mixed_loss);
    auto value = [&](const Mlp& m, const std::vector<double>& th) {
      return loss_gradient(m, t, th, mixed_loss).value;
    };
    std::vector<double> fd;
    for (std::size_t k = 0; k < net.num_params(); ++k)
      fd.push_back(central_difference(net.params(), k, 1e-6, [&](const std::vector<double>& p) {
        Mlp m = net;
        m.params() = p;
        return value(m, theta);
      }));
    expect_gradient_matches(lg.network, fd, 1e-5);
    checked += fd.size();
    std::vector<double> fd_theta;
    for (std::size_t k = 0; k < theta.size(); ++k)
      fd_theta.push_back(central_difference(theta, k, 1e-6, [&](const std::vector<double>& th) { return value(net, th); }));
    expect_gradient_matches(lg.theta, fd_theta, 1e-5);
  }
  EXPECT_GE(checked, 100u);
}

TEST(LossGradient, AgreesWithScalarTapeOfWholeNetwork) {
  // Independent path: the whole network, including the tangent recursion,
  // recorded scalar by scalar on the tape.
  auto net = small_net(8);
  const std::vector<double> t{10.0, 90.0};
  const auto fast = loss_gradient(net, t, {0.3, 0.2}, mixed_loss);

  Tape tape;
  std::vector<Var> params;
  for (double p : net.params()) params.push_back(tape.variable(p));
  NetworkLeaves leaves;
  leaves.N = net.num_outputs();
  leaves.B = t.size();
  leaves.x.resize(leaves.N * leaves.B);
  leaves.dx.resize(leaves.N * leaves.B);
  for (std::size_t j = 0; j < t.size(); ++j) {
    std::vector<Var> a{Var(t[j] / 200.0)}, da{Var(1.0 / 200.0)};
    std::size_t offset = 0;
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
      const std::size_t in = net.widths()[l], out = net.widths()[l + 1];
      std::vector<Var> z(out), dz(out);
      for (std::size_t r = 0; r < out; ++r) {
        Var s = params[offset + in * out + r], ds = 0.0;
        for (std::size_t c = 0; c < in; ++c) {
          s = s + params[offset + r * in + c] * a[c];
          ds = ds + params[offset + r * in + c] * da[c];
        }
        z[r] = s;
        dz[r] = ds;
      }
      offset += in * out + out;
      if (l + 1 < net.num_layers())
        for (std::size_t r = 0; r < out; ++r) {
          z[r] = tanh(z[r]);
          dz[r] = (1.0 - square(z[r])) * dz[r];
        }
      a = z;
      da = dz;
    }
    for (std::size_t i = 0; i < leaves.N; ++i) {
      leaves.x[i * leaves.B + j] = a[i];
      leaves.dx[i * leaves.B + j] = da[i];
    }
  }
  leaves.theta = {tape.variable(0.3), tape.variable(0.2)};
  const Var loss = mixed_loss(tape, leaves);
  const auto adj = tape.gradient(loss);
  EXPECT_NEAR(loss.value, fast.value, 1e-14 * std::abs(fast.value));
  for (std::size_t k = 0; k < params.size(); ++k)
    EXPECT_NEAR(adj[static_cast<std::size_t>(params[k].id)], fast.network[k], 1e-12 * (1.0 + std::abs(fast.network[k])));
}

TEST(LossGradient, ConstantLossHasZeroGradient) {
  auto net = small_net(4);
  const auto lg = loss_gradient(net, {1.0, 2.0}, {0.1}, [](Tape&, const NetworkLeaves&) { return Var(3.0); });
  EXPECT_EQ(lg.value, 3.0);
  for (double g : lg.network) EXPECT_EQ(g, 0.0);
  EXPECT_EQ(lg.theta, (std::vector<double>{0.0}));
}

TEST(Tape, RejectsUnsupportedPrimitives) {
  Tape tape;
  const Var x = tape.variable(2.0);
  EXPECT_THROW(tape.apply("exp", std::vector<Var>{x}), UnsupportedPrimitive);
  EXPECT_THROW(tape.apply("pow", std::vector<Var>{x, x}), UnsupportedPrimitive);
  EXPECT_THROW(tape.apply("pow", std::vector<Var>{x, Var(0.5)}), UnsupportedPrimitive);
  EXPECT_THROW(tape.apply("mul", std::vector<Var>{x}), UnsupportedPrimitive);
  const Var y = tape.apply("pow", std::vector<Var>{x, Var(3.0)});
  EXPECT_EQ(y.value, 8.0);
  EXPECT_EQ(tape.gradient(y)[static_cast<std::size_t>(x.id)], 12.0);
}

TEST(Adam, ZeroGradientLeavesParameters) {
  std::vector<double> p{1.0, -2.0, 0.5};
  Adam adam;
  for (int k = 0; k < 10; ++k) adam.step(p, {0.0, 0.0, 0.0});
  EXPECT_EQ(p, (std::vector<double>{1.0, -2.0, 0.5}));
}

TEST(Adam, ConstantGradientStepTendsToLearningRate) {
  std::vector<double> p{0.0, 0.0};
  Adam adam(1e-3);
  std::vector<double> before;
  for (int k = 0; k < 2000; ++k) {
    before = p;
    adam.step(p, {0.37, -4.0});
  }
  EXPECT_NEAR(p[0] - before[0], -1e-3, 1e-3 * 1e-6);
  EXPECT_NEAR(p[1] - before[1], 1e-3, 1e-3 * 1e-6);
}

TEST(Adam, Deterministic) {
  auto run = [] {
    auto net = small_net(6);
    Adam adam(1e-2);
    for (int k = 0; k < 20; ++k) {
      const auto lg = loss_gradient(net, {0.0, 50.0}, {0.2, 0.1}, mixed_loss);
      adam.step(net.params(), lg.network);
    }
    return net.params();
  };
  EXPECT_EQ(run(), run());
}

TEST(Network, CheckpointRoundTrip) {
  auto net = small_net(12, 3);
  const auto text = net.to_json().dump();
  const auto back = Mlp::from_json(nlohmann::json::parse(text));
  EXPECT_EQ(back.params(), net.params());
  EXPECT_EQ(back.widths(), net.widths());
  EXPECT_THROW(Mlp::from_json(nlohmann::json{{"format", "other"}}), IOError);
}

TEST(LossGradient, FiniteWhenHiddenUnitsSaturate) {
  auto net = small_net(2);
  for (double& p : net.params()) p *= 400.0;
  const auto lg = loss_gradient(net, {0.0, 100.0, 200.0}, {0.2, 0.1}, mixed_loss);
  EXPECT_TRUE(std::isfinite(lg.value));
  for (double g : lg.network) EXPECT_TRUE(std::isfinite(g));
}
