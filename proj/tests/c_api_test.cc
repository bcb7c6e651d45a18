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

#include "irene/irene.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>

#include <gtest/gtest.h>

namespace {

namespace fs = std::filesystem;

std::string Take(char* s) {
  std::string out = s ? s : "";
  irene_string_free(s);
  return out;
}

constexpr const char* kTiny = R"({
  "data": {"n_samples": 100, "n_test": 50},
  "train": {"epochs": 1, "sgd": {"milestones": []}},
  "probe": {"epochs": 1, "sgd": {"milestones": []}},
  "seeds": [1, 2],
  "sweep": {"rhos": [0.1, 0.99]}
})";

TEST(CApi, VersionAndDefaults) {
  EXPECT_STREQ(irene_version(), "1.0.0");
  irene_config* cfg = nullptr;
  ASSERT_EQ(irene_config_default(&cfg), IRENE_OK);
  int workers = 0;
  EXPECT_EQ(irene_config_get_workers(cfg, &workers), IRENE_OK);
  EXPECT_EQ(workers, 1);
  char* hash = nullptr;
  ASSERT_EQ(irene_config_hash(cfg, &hash), IRENE_OK);
  EXPECT_EQ(Take(hash).size(), 64u);
  irene_config_free(cfg);
}

TEST(CApi, ErrorsAreCodesNotExceptions) {
  irene_config* cfg = nullptr;
  EXPECT_EQ(irene_config_parse(R"({"bogus": true})", &cfg), IRENE_ERR_CONFIG);
  EXPECT_EQ(cfg, nullptr);
  EXPECT_NE(std::string(irene_last_error()).find("bogus"), std::string::npos);
  EXPECT_EQ(irene_config_parse(nullptr, &cfg), IRENE_ERR_CONFIG);
  EXPECT_EQ(irene_config_load("/nonexistent.json", &cfg), IRENE_ERR_CONFIG);
  EXPECT_EQ(irene_plotdata("/nonexistent/rows.csv", "/tmp"), IRENE_ERR_IO);
  ASSERT_EQ(irene_config_default(&cfg), IRENE_OK);
  EXPECT_EQ(irene_config_set_workers(cfg, 0), IRENE_ERR_CONFIG);
  irene_config_free(cfg);
}

TEST(CApi, OverridesRoundTripThroughJson) {
  irene_config* cfg = nullptr;
  ASSERT_EQ(irene_config_parse(kTiny, &cfg), IRENE_OK);
  ASSERT_EQ(irene_config_set_output(cfg, "somewhere"), IRENE_OK);
  ASSERT_EQ(irene_config_add_seed_offset(cfg, 10), IRENE_OK);
  char* out = nullptr;
  ASSERT_EQ(irene_config_get_output(cfg, &out), IRENE_OK);
  EXPECT_EQ(Take(out), "somewhere");
  char* json = nullptr;
  ASSERT_EQ(irene_config_to_json(cfg, &json), IRENE_OK);
  const std::string text = Take(json);
  irene_config* back = nullptr;
  ASSERT_EQ(irene_config_parse(text.c_str(), &back), IRENE_OK);
  char *h1 = nullptr, *h2 = nullptr;
  irene_config_hash(cfg, &h1);
  irene_config_hash(back, &h2);
  EXPECT_EQ(Take(h1), Take(h2));
  irene_config_free(back);
  irene_config_free(cfg);
}

TEST(CApi, RunAndSweep) {
  const fs::path dir = fs::temp_directory_path() / "irene_capi";
  fs::remove_all(dir);
  irene_config* cfg = nullptr;
  ASSERT_EQ(irene_config_parse(kTiny, &cfg), IRENE_OK);

  irene_run_result* run = nullptr;
  ASSERT_EQ(irene_run(cfg, (dir / "run").c_str(), 0, &run), IRENE_OK);
  ASSERT_EQ(irene_run_count(run), 2u);
  irene_metrics m{};
  ASSERT_EQ(irene_run_metrics(run, 1, &m), IRENE_OK);
  EXPECT_EQ(m.seed, 2u);
  EXPECT_EQ(m.chance_level, 0.1);
  EXPECT_EQ(m.n_eval, 50);
  EXPECT_EQ(irene_run_metrics(run, 2, &m), IRENE_ERR_CONFIG);
  char* report = nullptr;
  ASSERT_EQ(irene_run_report_json(run, 0, &report), IRENE_OK);
  EXPECT_NE(Take(report).find("\"config_hash\""), std::string::npos);
  irene_run_free(run);

  irene_sweep_result* sweep = nullptr;
  ASSERT_EQ(irene_sweep(cfg, (dir / "sweep").c_str(), 2, &sweep), IRENE_OK);
  EXPECT_EQ(irene_sweep_row_count(sweep), 8u);
  EXPECT_EQ(irene_sweep_failure_count(sweep), 0u);
  ASSERT_EQ(irene_sweep_row(sweep, 7, &m), IRENE_OK);
  EXPECT_EQ(m.rho, 0.99);
  EXPECT_EQ(m.mode, IRENE_MODE_IRENE);
  irene_sweep_free(sweep);

  EXPECT_EQ(irene_plotdata((dir / "sweep" / "sweep_rows.csv").c_str(),
                           (dir / "plots").c_str()),
            IRENE_OK);
  EXPECT_TRUE(fs::exists(dir / "plots" / "panel_d_leakage_vs_target.csv"));
  irene_config_free(cfg);
}

TEST(CApi, PartialSweepReportsFailedRows) {
  irene_config* cfg = nullptr;
  ASSERT_EQ(irene_config_parse(
                R"({"data": {"n_samples": 100, "n_test": 50},
                    "train": {"epochs": 1, "sgd": {"learning_rate": 1e200, "milestones": []}},
                    "probe": {"epochs": 1, "sgd": {"milestones": []}},
                    "seeds": [1], "sweep": {"rhos": [0.5]}})",
                &cfg),
            IRENE_OK);
  irene_sweep_result* sweep = nullptr;
  const fs::path dir = fs::temp_directory_path() / "irene_capi_partial";
  ASSERT_EQ(irene_sweep(cfg, dir.c_str(), 1, &sweep), IRENE_ERR_PARTIAL);
  ASSERT_NE(sweep, nullptr);
  EXPECT_EQ(irene_sweep_failure_count(sweep), 2u);
  irene_metrics m{};
  EXPECT_EQ(irene_sweep_row(sweep, 0, &m), IRENE_ERR_RUNTIME);
  EXPECT_EQ(std::string(irene_last_error()).rfind("error: ", 0), 0u);
  irene_sweep_free(sweep);
  irene_config_free(cfg);
}

TEST(CApi, Numerics) {
  const double perfect[] = {1, 0, 0, 1};
  const int32_t labels[] = {0, 1};
  double mi = -1.0;
  ASSERT_EQ(irene_mi_proxy(perfect, labels, 2, 2, 2, &mi), IRENE_OK);
  EXPECT_NEAR(mi, std::log(2.0), 1e-9);
  const double confused[] = {0.5, 0.5, 0.5, 0.5};
  ASSERT_EQ(irene_mi_proxy(confused, labels, 2, 2, 2, &mi), IRENE_OK);
  EXPECT_EQ(mi, 0.0);
  const int32_t bad[] = {0, 5};
  EXPECT_EQ(irene_mi_proxy(perfect, bad, 2, 2, 2, &mi), IRENE_ERR_CONFIG);

  const int64_t diagonal[] = {5, 0, 0, 5};
  ASSERT_EQ(irene_label_mi(diagonal, 2, 2, &mi), IRENE_OK);
  EXPECT_NEAR(mi, std::log(2.0), 1e-12);
}

}  // namespace
