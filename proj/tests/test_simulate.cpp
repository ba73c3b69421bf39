#include <gtest/gtest.h>

#include <cmath>

#include "obspinn/model/parser.hpp"
#include "obspinn/simulate/integrate.hpp"

using namespace obspinn;

namespace {

const ModelSpec& decay() {
  static const ModelSpec m = parse_model("states: x\ndynamics:\n d/dt x = -x\nmeasure:\n y1 = x\n");
  return m;
}

const char* kSeirFull = R"(states: S, E, I, R
params: beta, epsilon, gamma
dynamics:
  d/dt S = -beta*S*I
  d/dt E = beta*S*I - epsilon*E
  d/dt I = epsilon*E - gamma*I
  d/dt R = gamma*I
measure:
  y1 = I
)";

}  // namespace

TEST(Integrate, ConstantSolution) {
  const auto m = parse_model("states: x\ndynamics:\n d/dt x = 0\nmeasure:\n y1 = x\n");
  const auto tr = integrate(m, {}, {0.7}, 2.0, 0.2);
  ASSERT_EQ(tr.size(), 11u);
  for (const auto& s : tr.states) EXPECT_EQ(s[0], 0.7);
}

TEST(Integrate, ExponentialDecay) {
  const auto tr = integrate(decay(), {}, {1.0}, 1.0, 0.1);
  EXPECT_NEAR(tr.states.back()[0], std::exp(-1.0), 1e-8);
  EXPECT_NEAR(tr.times.back(), 1.0, 1e-15);
  // One step of the 5th-order method on x' = -x multiplies by
  // 1 + z + z^2/2 + z^3/6 + z^4/24 + z^5/120 + z^6/600 with z = -dt.
  const double z = -0.2;
  const double R = 1 + z + z * z / 2 + std::pow(z, 3) / 6 + std::pow(z, 4) / 24 + std::pow(z, 5) / 120 + std::pow(z, 6) / 600;
  EXPECT_NEAR(integrate(decay(), {}, {1.0}, 1.0, 0.2).states.back()[0], std::pow(R, 5), 1e-15);
}

TEST(Integrate, FifthOrderConvergence) {
  double dt = 0.2;
  double prev = std::abs(integrate(decay(), {}, {1.0}, 4.0, dt).states.back()[0] - std::exp(-4.0));
  for (int k = 0; k < 3; ++k) {
    dt /= 2;
    const double err = std::abs(integrate(decay(), {}, {1.0}, 4.0, dt).states.back()[0] - std::exp(-4.0));
    const double ratio = prev / err;
    EXPECT_GE(ratio, 24.0);
    EXPECT_LE(ratio, 40.0);
    prev = err;
  }
}

TEST(Integrate, SeirConservesPopulation) {
  const auto m = parse_model(kSeirFull);
  const auto tr = integrate(m, {0.26, 0.2, 0.1}, {0.99, 0.0, 0.01, 0.0}, 200.0, 0.2);
  ASSERT_EQ(tr.size(), 1001u);
  for (const auto& s : tr.states) EXPECT_NEAR(s[0] + s[1] + s[2] + s[3], 1.0, 1e-9);
}

TEST(Integrate, Deterministic) {
  const auto m = parse_model(kSeirFull);
  const auto a = integrate(m, {0.26, 0.2, 0.1}, {0.99, 0.0, 0.01, 0.0}, 20.0, 0.2);
  const auto b = integrate(m, {0.26, 0.2, 0.1}, {0.99, 0.0, 0.01, 0.0}, 20.0, 0.2);
  EXPECT_EQ(a.states, b.states);
}

TEST(Integrate, BlowUpIsReported) {
  const auto m = parse_model("states: x\ndynamics:\n d/dt x = x^2\nmeasure:\n y1 = x\n");
  EXPECT_THROW(integrate(m, {}, {1.0}, 10.0, 0.2), NonFiniteState);
  EXPECT_THROW(integrate(decay(), {}, {1.0}, 1.0, 0.3), InvalidModel);
}

TEST(Integrate, InputIsApplied) {
  // x' = u = exp(-k t) gives x(t) = (1 - exp(-k t)) / k.
  const auto m = parse_model("states: x\ninputs: u\ndynamics:\n d/dt x = u\nmeasure:\n y1 = x\n");
  const auto tr = integrate(m, {}, {0.0}, 10.0, 0.2, InputFunction::exp_decay(0.5));
  EXPECT_NEAR(tr.states.back()[0], (1.0 - std::exp(-5.0)) / 0.5, 1e-9);
}

TEST(InputFunction, DerivativesOfExpDecay) {
  const auto u = InputFunction::exp_decay(0.01);
  for (unsigned j = 0; j < 4; ++j) EXPECT_DOUBLE_EQ(u.value(3.0, j), std::pow(-0.01, j) * u.value(3.0));
  const auto tab = InputFunction::tabulated({0.0, 1.0, 2.0}, {0.0, 2.0, 3.0});
  EXPECT_DOUBLE_EQ(tab.value(0.5), 1.0);
  EXPECT_DOUBLE_EQ(tab.value(1.5, 1), 1.0);
  EXPECT_DOUBLE_EQ(tab.value(5.0), 3.0);
}
  // Lagrange remainder: max|x^(4)| |prod (t - t_j)| / 4! with x^(4) = e^-t.
TEST(Sample, GridAndOffGrid) {
  const auto tr = integrate(decay(), {}, {1.0}, 2.0, 0.2);
  EXPECT_EQ(sample(tr, 0.4)[0], tr.states[2][0]);
  EXPECT_EQ(sample(tr, 2.0)[0], tr.states.back()[0]);
  // Lagrange remainder: |x| |prod (t - t_j)| / 4! with x = e^-t.
  const auto bound = [&](double t, std::vector<double> nodes) {
    double w = 1.0;
    for (double tj : nodes) w *= std::abs(t - tj);
    return std::exp(-nodes.front()) * w / 24.0 + 1e-8;
  };
  EXPECT_NEAR(sample(tr, 0.5)[0], std::exp(-0.5), bound(0.5, {0.2, 0.4, 0.6, 0.8}));
  EXPECT_NEAR(sample(tr, 0.05)[0], std::exp(-0.05), bound(0.05, {0.0, 0.2, 0.4, 0.6}));
  EXPECT_NEAR(sample(tr, 1.93)[0], std::exp(-1.93), bound(1.93, {1.4, 1.6, 1.8, 2.0}));
  const auto fine = integrate(decay(), {}, {1.0}, 2.0, 0.05);
  EXPECT_NEAR(sample(fine, 0.51)[0], std::exp(-0.51), 1e-6);
  EXPECT_THROW(sample(tr, 3.0), OutOfDomain);
  EXPECT_THROW(sample(tr, -0.1), OutOfDomain);
}
