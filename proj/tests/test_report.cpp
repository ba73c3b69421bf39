#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "obspinn/report/report.hpp"

using namespace obspinn;

TEST(Metrics, RseBasics) {
  const std::vector<double> truth{1.0, 3.0, 2.0, 6.0};
  EXPECT_EQ(rse(truth, truth), 0.0);
  EXPECT_EQ(rse(std::vector<double>(4, 3.0), truth), 1.0);
  // Hand computation: errors (1, -1, 0, 2), centered truth (-2, 0, -1, 3).
  EXPECT_DOUBLE_EQ(rse({2.0, 2.0, 2.0, 8.0}, truth), 6.0 / 14.0);
  EXPECT_THROW(rse({1.0, 2.0}, {4.0, 4.0}), ConstantTruth);
  EXPECT_THROW(rse({1.0}, {4.0}), InvalidModel);
  EXPECT_THROW(rse({1.0, 2.0}, {4.0, 5.0, 6.0}), InvalidModel);
}

TEST(Metrics, RseInvariantUnderSharedAffineMap) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> p(40), t(40), p2, t2;
  for (std::size_t k = 0; k < 40; ++k) {
    t[k] = u(rng);
    p[k] = t[k] + 0.1 * u(rng);
    p2.push_back(4.0 * p[k] + 0.5);
    t2.push_back(4.0 * t[k] + 0.5);
  }
  EXPECT_NEAR(rse(p, t), rse(p2, t2), 1e-12 * rse(p, t));
}

TEST(Metrics, StreamingAndBatchAgreeExactly) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> p(100), t(100);
    RseAccumulator acc;
    for (std::size_t k = 0; k < 100; ++k) {
      t[k] = u(rng);
      p[k] = t[k] + 0.01 * (u(rng) - 0.5);
      acc.add(p[k], t[k]);
    }
    EXPECT_EQ(acc.value(), rse(p, t));
    const double est = u(rng), truth = u(rng) + 0.1;
    EXPECT_EQ(rae(est, truth), rae_from_ratio(est, truth));
  }
}

TEST(Metrics, Rae) {
  EXPECT_NEAR(rae(0.242, 0.2), 0.21, 1e-15);
  EXPECT_NEAR(rae(0.187, 0.2), 0.065, 1e-15);
  EXPECT_EQ(rae(0.2, 0.2), 0.0);
  EXPECT_THROW(rae(0.1, 0.0), ZeroTruth);
}

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST(Report, RowsRoundTripAndShape) {
  const auto s = make_scenario("seir");
  const auto d = make_dataset(s, 0.0, 1);
  auto net = Mlp::pinn(4);
  net.glorot_init(2);
  const auto rows = compute_metrics(s, d, net, {0.187});
  std::size_t per_split = 0, rae_rows = 0;
  for (const auto& r : rows) {
    per_split += r.metric == "RSE" && r.split == "test";
    rae_rows += r.metric == "RAE";
  }
  EXPECT_EQ(per_split, 4u);
  EXPECT_EQ(rae_rows, 1u);
  EXPECT_EQ(rows.size(), 2 * 4 + 1u);
  EXPECT_NEAR(metric_value(rows, "RAE", "epsilon"), 0.065, 1e-15);
  const auto back = parse_metrics_csv(metrics_csv(rows).to_string());
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) EXPECT_EQ(back[k].value, rows[k].value);
}

TEST(Report, EmitsArtifacts) {
  const auto s = make_scenario("saird");
  const auto d = make_dataset(s, 0.0, 1);
  TrainOutcome o;
  o.mode = Mode::proposed;
  o.net = Mlp::pinn(5);
  o.net.glorot_init(4);
  o.theta_unknown = {0.3, 0.12};
  o.trace = {{0, {1.0, 2.0, 3.0, 4.0, 10.0}}};
  o.history = {{{0.3, 0.12}, 0.5}, {{0.1, 0.4}, 2.0}};
  const auto dir = scratch("obspinn_report_emit");
  emit_report(dir, s, d, o);
  for (const char* f : {"report.csv", "predictions.csv", "losses.csv", "bo_history.csv", "checkpoint.json", "states_saird.svg", "bo_saird.svg"})
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  EXPECT_EQ(read_text(dir / "losses.csv"), "epoch,L_eq,L_init,L_data,L_aug,total\n0,1,2,3,4,10\n");
  EXPECT_EQ(read_text(dir / "bo_history.csv"), "s,beta,kappa,E_val\n1,0.3,0.12,0.5\n2,0.1,0.4,2\n");
  const auto svg = read_text(dir / "bo_saird.svg");
  EXPECT_NE(svg.find("E_val vs beta"), std::string::npos);
  EXPECT_NE(svg.find("E_val vs kappa"), std::string::npos);
  const auto pred = CsvTable::parse(read_text(dir / "predictions.csv"));
  EXPECT_EQ(pred.rows.size(), 1001u);
  // Re-evaluating the checkpoint reproduces report.csv byte for byte.
  const auto c = Checkpoint::from_json(nlohmann::json::parse(read_text(dir / "checkpoint.json")));
  EXPECT_EQ(c.net.params(), o.net.params());
  const auto again = scratch("obspinn_report_again");
  write_evaluation(again, s, d, c);
  EXPECT_EQ(read_text(again / "report.csv"), read_text(dir / "report.csv"));
  std::filesystem::remove_all(dir);
  std::filesystem::remove_all(again);
}
