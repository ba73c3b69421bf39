#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "obspinn/observability/analysis.hpp"
#include "obspinn/scenarios/dataset.hpp"

using namespace obspinn;

TEST(Scenario, PresetsMatchModelFiles) {
  for (const auto& id : scenario_ids()) {
    const auto path = std::filesystem::path(OBSPINN_SOURCE_DIR) / "models" / (id + ".model");
    EXPECT_EQ(parse_model(read_text(path)), parse_model(preset_text(id))) << id;
  }
}

TEST(Scenario, ParameterSplit) {
  const auto seir = make_scenario("seir");
  EXPECT_EQ(seir.unknown_names(), (std::vector<std::string>{"epsilon"}));
  EXPECT_EQ(seir.unknown_true(), (std::vector<double>{0.2}));
  EXPECT_EQ(seir.theta_with({0.3}), (std::vector<double>{0.26, 0.3, 0.1}));
  const auto saird = make_scenario("saird", {{"beta"}, false});
  EXPECT_EQ(saird.unknown_names(), (std::vector<std::string>{"beta"}));
  // kappa is known, so it is substituted before the analysis.
  EXPECT_FALSE(saird.analysis.dynamics[2].contains(Symbol::param(2)));
  EXPECT_TRUE(make_scenario("saird").analysis.dynamics[2].contains(Symbol::param(2)));
  const auto sicrd = make_scenario("sicrd", {{}, true});
  EXPECT_EQ(sicrd.init_known, (std::vector<std::size_t>{0, 1, 2, 4}));
  EXPECT_THROW(make_scenario("sicrd", {{"r"}, false}), InvalidModel);
  EXPECT_THROW(make_scenario("sir"), InvalidModel);
}

TEST(Scenario, FullModelMatchesReducedModel) {
  for (const auto& id : scenario_ids()) {
    const auto s = make_scenario(id);
    const auto full = simulate_truth(s);
    const auto reduced_model = s.reduced();
    std::vector<double> x0;
    for (const auto& name : reduced_model.state_names) x0.push_back(s.x0[*s.model.state_index(name)]);
    const auto red = integrate(reduced_model, s.theta_true, x0, s.T, s.dt, s.input);
    double worst = 0.0;
    for (std::size_t j = 0; j < full.size(); ++j) {
      double rest = 1.0;
      for (std::size_t i = 0; i < reduced_model.num_states(); ++i) {
        const double v = red.states[j][i];
        worst = std::max(worst, std::abs(v - full.states[j][*s.model.state_index(reduced_model.state_names[i])]));
        rest -= v;
      }
      // The eliminated compartment is one minus the others.
      worst = std::max(worst, std::abs(rest - full.states[j][s.model.reductions[0].state]));
    }
    EXPECT_LT(worst, 1e-9) << id;
  }
}

TEST(Dataset, NoiseFreeMeasurementsAreExact) {
  const auto s = make_scenario("seir");
  const auto d = make_dataset(s, 0.0, 7);
  EXPECT_EQ(d.train.size(), 50u);
  EXPECT_EQ(d.val.size(), 50u);
  EXPECT_EQ(d.test.size(), 100u);
  const auto traj = simulate_truth(s);
  for (std::size_t j = 0; j < d.train.size(); ++j) {
    const auto k = static_cast<std::size_t>(std::llround(d.train.t[j] / s.dt));
    EXPECT_EQ(d.train.t[j], traj.times[k]);
    EXPECT_EQ(d.train.measurement(j, 0), traj.states[k][2]);
  }
  for (std::size_t j = 0; j < d.val.size(); ++j) {
    EXPECT_GE(d.val.t[j], 0.0);
    EXPECT_LE(d.val.t[j], 200.0);
    EXPECT_EQ(d.val.measurement(j, 0), d.val.truth[j][2]);
  }
  // Train and test are disjoint grid points.
  for (double t : d.test.t) EXPECT_EQ(std::count(d.train.t.begin(), d.train.t.end(), t), 0);
}

TEST(Dataset, OneSidedNoiseBounds) {
  const auto s = make_scenario("seir");
  const auto d = make_dataset(s, 0.05, 3);
  double lo = 1.0, hi = 0.0;
  for (const SplitData* split : {&d.train, &d.val, &d.test})
    for (std::size_t j = 0; j < split->size(); ++j)
      for (std::size_t i = 0; i < 4; ++i) {
        const double e = split->noisy[j][i] - split->truth[j][i];
        EXPECT_GE(e, 0.0);
        EXPECT_LE(e, 0.05);
        lo = std::min(lo, e);
        hi = std::max(hi, e);
      }
  EXPECT_LT(lo, 0.005);
  EXPECT_GT(hi, 0.045);
  DatasetOptions sym;
  sym.symmetric_noise = true;
  const auto ds = make_dataset(s, 0.1, 3, sym);
  for (std::size_t j = 0; j < ds.train.size(); ++j) EXPECT_LE(std::abs(ds.train.noisy[j][0] - ds.train.truth[j][0]), 0.05);
}

TEST(Dataset, Deterministic) {
  const auto s = make_scenario("seir");
  EXPECT_EQ(make_dataset(s, 0.05, 11), make_dataset(s, 0.05, 11));
  EXPECT_NE(make_dataset(s, 0.05, 11).train.t, make_dataset(s, 0.05, 12).train.t);
}

TEST(Oracle, SeirFirstDerivative) {
  const auto s = make_scenario("seir");
  const auto d = prepare_dataset(s, 0.0, 5);
  EXPECT_EQ(d.output_order, 2u);
  for (std::size_t j = 0; j < d.train.size(); ++j) {
    const auto& x = d.train.truth[j];
    const auto& y = d.train.jets[j].outputs[0];
    EXPECT_EQ(y[0], x[2]);
    EXPECT_NEAR(y[1], 0.2 * x[1] - 0.1 * x[2], 1e-15);
  }
  EXPECT_EQ(make_dataset(s, 0.0, 5).train.jets[3].outputs[0][0], d.train.jets[3].outputs[0][0]);
}

TEST(Oracle, SairdInputIsExact) {
  const auto s = make_scenario("saird");
  const auto d = prepare_dataset(s, 0.0, 5);
  EXPECT_EQ(d.output_order, 3u);
  EXPECT_EQ(d.input_order, 2u);
  for (std::size_t j = 0; j < d.val.size(); ++j) {
    EXPECT_EQ(d.val.jets[j].inputs[0][0], std::exp(-0.01 * d.val.t[j]));
    EXPECT_EQ(d.val.jets[j].outputs.size(), 2u);
  }
}

TEST(Oracle, AgreesWithFiniteDifferences) {
  for (const auto& id : scenario_ids()) {
    const auto s = make_scenario(id);
    const auto traj = simulate_truth(s);
    DerivativeOracle oracle(s, 1, 0);
    const auto I = *s.model.state_index("I");
    double worst = 0.0, scale = 0.0;
    for (std::size_t j = 1; j + 1 < traj.size(); ++j) {
      const double fd = (traj.states[j + 1][I] - traj.states[j - 1][I]) / (2 * s.dt);
      worst = std::max(worst, std::abs(oracle.at(traj.times[j], traj.states[j]).outputs[0][1] - fd));
      scale = std::max(scale, std::abs(fd));
    }
    // Central differences are second order: error ~ dt^2 |y'''| / 6.
    EXPECT_LT(worst, 1e-3 * scale) << id;
  }
}

TEST(Dataset, FilesRoundTrip) {
  const auto s = make_scenario("saird", {{"beta"}, false});
  const auto d = prepare_dataset(s, 0.0, 2);
  const auto dir = std::filesystem::temp_directory_path() / "obspinn_dataset_roundtrip";
  std::filesystem::remove_all(dir);
  save_dataset(d, dir);
  EXPECT_EQ(load_dataset(dir), d);
  std::filesystem::remove_all(dir);
}

TEST(Reconstruction, NoiseFreeFidelity) {
  for (const auto& id : scenario_ids()) {
    const auto s = make_scenario(id);
    const auto result = analyze_all(s.analysis);
    const auto d = prepare_dataset(s, 0.0, 1);
    for (const auto& st : result.states) {
      if (!st.observable()) continue;
      const auto expr = reconstruction(st);
      const auto i = *s.model.state_index(st.name);
      double worst = 0.0, scale = 0.0;
      for (std::size_t j = 0; j < d.train.size(); ++j) {
        const double truth = d.train.truth[j][i];
        scale = std::max(scale, std::abs(truth));
        try {
          worst = std::max(worst, std::abs(evaluate_reconstruction(expr, d.train.jets[j], s.theta_true) - truth));
        } catch (const DenominatorNearZero&) {
        }
      }
      EXPECT_LT(worst / scale, 1e-3) << id << " " << st.name;
    }
  }
}
