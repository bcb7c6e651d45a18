//
// Copyright 2026 The IRENE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "irene/experiment.h"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "irene/csv.h"
#include "irene/error.h"

namespace irene::experiment {
namespace {

namespace fs = std::filesystem;

fs::path FreshDir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("irene_test_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string Slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<csv::Row> ReadTable(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return csv::Parse(in);
}

// A few-second configuration: N=200, 3 epochs.
ExperimentConfig Tiny() {
  ExperimentConfig c = ExperimentConfig::Defaults();
  c.data.n_samples = 200;
  c.data.n_test = 100;
  c.train.epochs = 3;
  c.train.sgd.milestones = {2};
  c.probe.epochs = 3;
  c.probe.sgd.milestones = {2};
  c.seeds = {7};
  return c;
}

TEST(Config, DefaultsMatchDeskProtocol) {
  const ExperimentConfig c = ExperimentConfig::Defaults();
  EXPECT_EQ(c.train.epochs, 30);
  EXPECT_EQ(c.train.sgd.milestones, (std::vector<int>{15, 22}));
  EXPECT_EQ(c.train.sgd.learning_rate, 0.1);
  EXPECT_EQ(c.train.sgd.momentum, 0.9);
  EXPECT_EQ(c.train.sgd.weight_decay, 1e-4);
  EXPECT_EQ(c.train.batch_size, 100u);
  EXPECT_EQ(c.train.alpha, 0.5);
  EXPECT_EQ(c.train.gamma, 0.5);
  ExperimentConfig full = c;
  full.UseFullProtocol();
  EXPECT_EQ(full.train.epochs, 80);
  EXPECT_EQ(full.train.sgd.milestones, (std::vector<int>{40, 60}));
  c.Validate();
}

TEST(Config, DuplicateSeedRejectedAtParseTime) {
  EXPECT_THROW(ParseConfig(std::string_view(R"({"seeds": [1, 2, 1]})")),
               ConfigError);
}

TEST(Config, StrictKeysAndTypes) {
  EXPECT_THROW(ParseConfig(std::string_view(R"({"bogus": 1})")), ConfigError);
  EXPECT_THROW(ParseConfig(std::string_view(R"({"train": {"lr": 0.1}})")),
               ConfigError);
  EXPECT_THROW(ParseConfig(std::string_view(R"({"train": {"epochs": "ten"}})")),
               ConfigError);
  EXPECT_THROW(ParseConfig(std::string_view(R"({"seeds": []})")), ConfigError);
  EXPECT_THROW(ParseConfig(std::string_view("{not json")), ConfigError);
  EXPECT_THROW(ParseConfig(std::string_view(R"({"data": {"rho": 0.01}})")),
               ConfigError);
  EXPECT_THROW(ParseConfig(std::string_view(R"({"mode": "other"})")),
               ConfigError);
  EXPECT_THROW(LoadConfig("/nonexistent/config.json"), ConfigError);
}

TEST(Config, JsonRoundTripPreservesHash) {
  ExperimentConfig c = Tiny();
  c.data.rho = 0.7;
  c.train.marginal = engine::MarginalSource::kDatasetPrior;
  c.sweep.rhos = {0.1, 0.5};
  const ExperimentConfig back = ParseConfig(ToJson(c));
  EXPECT_EQ(ToJson(back), ToJson(c));
  EXPECT_EQ(ConfigHash(back), ConfigHash(c));
}

TEST(Config, HashIgnoresOutputAndWorkersOnly) {
  ExperimentConfig a = Tiny();
  ExperimentConfig b = a;
  b.output = "elsewhere";
  b.workers = 4;
  EXPECT_EQ(ConfigHash(a), ConfigHash(b));
  EXPECT_EQ(ConfigHash(a).size(), 64u);
  b.data.noise_sigma = 1.5;
  EXPECT_NE(ConfigHash(a), ConfigHash(b));
}

TEST(Config, SeedOffset) {
  ExperimentConfig c = Tiny();
  c.seeds = {1, 2};
  c.ApplySeedOffset(100);
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{101, 102}));
}

TEST(Stats, SampleStandardDeviation) {
  const Stat s = ComputeStat({1.0, 2.0, 4.0});
  EXPECT_DOUBLE_EQ(s.mean, 7.0 / 3.0);
  EXPECT_NEAR(s.std, std::sqrt(((1 - 7.0 / 3) * (1 - 7.0 / 3) +
                                (2 - 7.0 / 3) * (2 - 7.0 / 3) +
                                (4 - 7.0 / 3) * (4 - 7.0 / 3)) / 2.0),
              1e-15);
  EXPECT_EQ(ComputeStat({3.0}).std, 0.0);
}

TEST(RunSingle, MinimalRunIsFastAndWritesWellFormedJson) {
  const fs::path dir = FreshDir("single");
  const auto start = std::chrono::steady_clock::now();
  const auto outcomes = RunSingle(Tiny(), dir, true);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  EXPECT_LT(seconds, 5.0);
  ASSERT_EQ(outcomes.size(), 1u);

  const nlohmann::json report = nlohmann::json::parse(Slurp(dir / "report_seed7.json"));
  EXPECT_EQ(report.at("config_hash"), ConfigHash(Tiny()));
  EXPECT_EQ(report.at("seed"), 7);
  EXPECT_EQ(report.at("metrics").at("chance_level"), 0.1);
  EXPECT_EQ(report.at("trace").size(), 3u);
  EXPECT_TRUE(fs::exists(dir / "checkpoint_seed7.json"));
  EXPECT_TRUE(fs::exists(dir / "data_seed7.csv"));

  const auto trace = ReadTable(dir / "trace_seed7.csv");
  ASSERT_EQ(trace.size(), 4u);
  EXPECT_EQ(trace[0].back(), "config_hash");
  EXPECT_EQ(trace[1].back(), ConfigHash(Tiny()));
}

TEST(RunSingle, RerunIsByteIdentical) {
  const fs::path a = FreshDir("rerun_a"), b = FreshDir("rerun_b");
  RunSingle(Tiny(), a);
  RunSingle(Tiny(), b);
  EXPECT_EQ(Slurp(a / "report_seed7.json"), Slurp(b / "report_seed7.json"));
  EXPECT_EQ(Slurp(a / "trace_seed7.csv"), Slurp(b / "trace_seed7.csv"));
}

ExperimentConfig TinySweep() {
  ExperimentConfig c = Tiny();
  c.data.n_samples = 100;
  c.data.n_test = 50;
  c.train.epochs = 1;
  c.train.sgd.milestones = {};
  c.probe.epochs = 1;
  c.probe.sgd.milestones = {};
  c.seeds = {1, 2, 3};
  c.sweep.rhos = {0.1, 0.99};
  return c;
}

TEST(RunSweep, CrossProductRowCountAndOrder) {
  const fs::path dir = FreshDir("sweep");
  const SweepResult r = RunSweep(TinySweep(), dir, 1);
  ASSERT_EQ(r.rows.size(), 12u);
  EXPECT_EQ(r.failures(), 0u);
  EXPECT_EQ(r.aggregates.size(), 4u);
  for (std::size_t i = 1; i < r.rows.size(); ++i) {
    const auto& p = r.rows[i - 1].key;
    const auto& q = r.rows[i].key;
    EXPECT_TRUE(std::tie(p.rho, p.mode, p.seed) < std::tie(q.rho, q.mode, q.seed));
  }
  const auto rows = ReadTable(dir / "sweep_rows.csv");
  ASSERT_EQ(rows.size(), 13u);
  EXPECT_EQ(rows[0], (csv::Row{"rho", "mode", "seed", "target_acc",
                               "leak_cotrained", "leak_probe", "chance",
                               "mi_final", "status", "config_hash"}));
}

TEST(RunSweep, AggregatesRecomputeFromRows) {
  const fs::path dir = FreshDir("aggregate");
  RunSweep(TinySweep(), dir, 1);
  // Recompute from the emitted rows file with plain arithmetic.
  const auto rows = ReadTable(dir / "sweep_rows.csv");
  std::map<std::pair<std::string, std::string>, std::vector<double>> target;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    target[{rows[i][0], rows[i][1]}].push_back(std::stod(rows[i][3]));
  }
  const auto agg = ReadTable(dir / "sweep_aggregate.csv");
  ASSERT_EQ(agg.size(), 5u);
  for (std::size_t i = 1; i < agg.size(); ++i) {
    const auto& values = target.at({agg[i][0], agg[i][1]});
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    EXPECT_NEAR(std::stod(agg[i][3]), mean, 1e-9);
    EXPECT_NEAR(std::stod(agg[i][4]), std::sqrt(ss / (values.size() - 1.0)), 1e-9);
  }
}

TEST(RunSweep, IndependentOfWorkerCount) {
  const fs::path a = FreshDir("workers1"), b = FreshDir("workers3");
  RunSweep(TinySweep(), a, 1);
  RunSweep(TinySweep(), b, 3);
  EXPECT_EQ(Slurp(a / "sweep_rows.csv"), Slurp(b / "sweep_rows.csv"));
  EXPECT_EQ(Slurp(a / "sweep_aggregate.csv"), Slurp(b / "sweep_aggregate.csv"));
}

TEST(RunSweep, FailedCellsAreRecordedNotFatal) {
  ExperimentConfig c = TinySweep();
  c.train.sgd.learning_rate = 1e200;  // diverges on the first step
  const fs::path dir = FreshDir("failures");
  const SweepResult r = RunSweep(c, dir, 2);
  EXPECT_EQ(r.rows.size(), 12u);
  EXPECT_EQ(r.failures(), 12u);
  for (const auto& row : r.rows) EXPECT_EQ(row.status.rfind("error: ", 0), 0u);
  const auto rows = ReadTable(dir / "sweep_rows.csv");
  EXPECT_EQ(rows.size(), 13u);
  EXPECT_EQ(rows[1][3], "");
}

TEST(PlotData, PanelsHaveExpectedShapeAndAreIdempotent) {
  const fs::path dir = FreshDir("plot");
  const SweepResult r = RunSweep(TinySweep(), dir, 1);
  const fs::path p1 = dir / "p1", p2 = dir / "p2";
  EmitPlotData(ReadSweepRows(dir / "sweep_rows.csv"), p1);
  EmitPlotData(ReadSweepRows(dir / "sweep_rows.csv"), p2);
  for (const char* name :
       {"panel_a_target_vs_rho.csv", "panel_b_target_vs_rho_zoom.csv",
        "panel_c_leakage_vs_rho.csv", "panel_d_leakage_vs_target.csv"}) {
    EXPECT_EQ(Slurp(p1 / name), Slurp(p2 / name)) << name;
    const auto table = ReadTable(p1 / name);
    ASSERT_EQ(table.size(), 5u) << name;  // header + (2 rho x 2 modes)
    EXPECT_EQ(table[0].back(), "config_hash");
    EXPECT_EQ(table[1].back(), r.config_hash);
  }
  const auto c = ReadTable(p1 / "panel_c_leakage_vs_rho.csv");
  EXPECT_EQ(c[0][3], "leak_cotrained_mean");
  EXPECT_EQ(c[0][4], "leak_cotrained_std");
  const auto d = ReadTable(p1 / "panel_d_leakage_vs_target.csv");
  EXPECT_EQ(d[0], (csv::Row{"rho", "mode", "target_acc_mean",
                            "leak_cotrained_mean", "config_hash"}));
}

TEST(PlotData, MissingColumnsAreReported) {
  const fs::path dir = FreshDir("badrows");
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "rows.csv");
    out << "rho,mode,seed,target_acc\r\n0.1,irene,1,0.5\r\n";
  }
  try {
    ReadSweepRows(dir / "rows.csv");
    FAIL() << "expected IoError";
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("missing columns: leak_cotrained"),
              std::string::npos);
  }
}

TEST(Csv, QuotingAndRoundTrip) {
  std::stringstream ss;
  csv::WriteRow(ss, {"plain", "with,comma", "with \"quote\"", "line\nbreak", ""});
  EXPECT_EQ(ss.str(),
            "plain,\"with,comma\",\"with \"\"quote\"\"\",\"line\nbreak\",\r\n");
  const auto rows = csv::Parse(ss);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0], (csv::Row{"plain", "with,comma", "with \"quote\"",
                               "line\nbreak", ""}));
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.125}) {
    EXPECT_EQ(csv::ParseDouble(csv::FormatDouble(v)), v);
  }
  EXPECT_EQ(csv::FormatDouble(0.5), "0.5");
  EXPECT_THROW(csv::ParseDouble("1.5x"), IoError);
}

}  // namespace
}  // namespace irene::experiment
