#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "obspinn/io.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "obspinn_cli_test";

int run(const std::string& args) {
  const std::string cmd = std::string(OBSPINN_CLI) + " " + args + " > " + (kRoot / "last.txt").string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string last_output() { return obspinn::read_text(kRoot / "last.txt"); }

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    fs::remove_all(kRoot);
    fs::create_directories(kRoot);
  }
  void TearDown() override { fs::remove_all(kRoot); }
  static std::string p(const std::string& name) { return (kRoot / name).string(); }
};

}  // namespace

TEST_F(Cli, AnalyzeExitCodes) {
  EXPECT_EQ(run("analyze --scenario seir"), 0);
  EXPECT_NE(last_output().find("observable: {S, E}"), std::string::npos);
  EXPECT_EQ(run("analyze --scenario sicrd"), 0);
  EXPECT_NE(last_output().find("unobservable: {R}"), std::string::npos);

  obspinn::write_text(kRoot / "z.model", "states: X, Z\nparams: a\ndynamics:\n  d/dt X = -a*X\n  d/dt Z = Z\nmeasure:\n  y1 = X\n");
  EXPECT_EQ(run("analyze --model " + p("z.model")), 2);
  obspinn::write_text(kRoot / "bad.model", "states: X\ndynamics:\n  d/dt X = -X +\nmeasure:\n  y1 = X\n");
  EXPECT_EQ(run("analyze --model " + p("bad.model")), 1);
  EXPECT_NE(last_output().find("line 3"), std::string::npos);
  EXPECT_EQ(run("analyze --scenario nope"), 1);
}

TEST_F(Cli, SimulateWritesFullGrid) {
  ASSERT_EQ(run("simulate --scenario seir --out " + p("sim")), 0);
  const auto t = obspinn::CsvTable::parse(obspinn::read_text(kRoot / "sim" / "trajectory.csv"));
  EXPECT_EQ(t.rows.size(), 1001u);
  EXPECT_TRUE(fs::exists(kRoot / "sim" / "config.json"));
  EXPECT_EQ(run("simulate --scenario seir --out " + p("sim")), 1);
}

TEST_F(Cli, TrainThenEvaluateReproducesReport) {
  ASSERT_EQ(run("--seed 3 dataset --scenario seir --sigma 0.05 --out " + p("ds")), 0);
  const auto manifest = obspinn::read_text(kRoot / "ds" / "manifest.json");
  ASSERT_EQ(run("train --data " + p("ds") + " --epochs 100 --iterations 2 --out " + p("tr")), 0);
  EXPECT_EQ(obspinn::read_text(kRoot / "ds" / "manifest.json"), manifest);
  ASSERT_EQ(run("evaluate --checkpoint " + p("tr/checkpoint.json") + " --data " + p("ds") + " --out " + p("ev")), 0);
  EXPECT_EQ(obspinn::read_text(kRoot / "tr" / "report.csv"), obspinn::read_text(kRoot / "ev" / "report.csv"));
}

TEST_F(Cli, ConfigRerunIsBitIdentical) {
  ASSERT_EQ(run("--seed 5 reproduce --scenario seir --mode baseline --epochs 150 --out " + p("a")), 0);
  ASSERT_EQ(run("--config " + p("a/config.json") + " reproduce --out " + p("b")), 0);
  for (const auto* f : {"report.csv", "checkpoint.json", "losses.csv", "predictions.csv", "dataset/train.csv"})
    EXPECT_EQ(obspinn::read_text(kRoot / "a" / f), obspinn::read_text(kRoot / "b" / f)) << f;
}

TEST_F(Cli, BadModeIsAnError) {
  ASSERT_EQ(run("dataset --scenario seir --out " + p("ds")), 0);
  EXPECT_EQ(run("train --data " + p("ds") + " --mode bogus --out " + p("x")), 1);
}
