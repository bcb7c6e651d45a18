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

#ifndef IRENE_EXPERIMENT_H_
#define IRENE_EXPERIMENT_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "irene/datagen.h"
#include "irene/engine.h"
#include "irene/leakage.h"

namespace irene::experiment {

struct SweepSpec {
  std::vector<double> rhos{0.1, 0.3, 0.5, 0.7, 0.9, 0.95, 0.99};
  std::vector<engine::TrainingMode> modes{engine::TrainingMode::kBaseline,
                                          engine::TrainingMode::kIrene};
};

// Everything a run or sweep needs. `data.seed` is ignored: each run takes its
// seed from `seeds`.
struct ExperimentConfig {
  data::BiasConfig data;
  engine::Architecture model;
  engine::IreneConfig train;
  eval::ProbeConfig probe;
  engine::TrainingMode mode = engine::TrainingMode::kIrene;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  SweepSpec sweep;
  std::string output = "irene-out";
  int workers = 1;

  void Validate() const;
  // Desk-scale defaults: 30 epochs, milestones [15, 22].
  static ExperimentConfig Defaults();
  // The 80-epoch schedule with milestones [40, 60].
  void UseFullProtocol();
  void ApplySeedOffset(std::uint64_t offset);
};

// Strict: unknown keys, wrong types and duplicate seeds are ConfigErrors.
// Missing keys keep their defaults.
ExperimentConfig ParseConfig(const nlohmann::json& j);
ExperimentConfig ParseConfig(std::string_view text);
ExperimentConfig LoadConfig(const std::filesystem::path& path);
nlohmann::json ToJson(const ExperimentConfig& config);

// SHA-256 (hex) of the canonical JSON of every result-affecting field
// (output and workers excluded).
std::string ConfigHash(const ExperimentConfig& config);

struct CellKey {
  double rho = 0.0;
  engine::TrainingMode mode = engine::TrainingMode::kIrene;
  std::uint64_t seed = 0;
};

struct CellOutcome {
  CellKey key;
  bool ok = false;
  std::string error;
  eval::EvalResult eval;
  engine::TrainTrace trace;
  std::optional<engine::ModelTriple> model;
};

// Generates data, trains, fits the probe, evaluates. Data, initialization and
// shuffling depend only on the seed, so the two modes of one seed see the same
// data and the same starting point. Throws on failure.
CellOutcome RunCell(const ExperimentConfig& config, const CellKey& key);

// One cell per configured seed at config.data.rho and config.mode. Writes
// report_seed<S>.json, trace_seed<S>.csv and checkpoint_seed<S>.json into
// `out_dir`. Set `export_data` to also write data_seed<S>.csv.
std::vector<CellOutcome> RunSingle(const ExperimentConfig& config,
                                   const std::filesystem::path& out_dir,
                                   bool export_data = false);

nlohmann::json ReportJson(const ExperimentConfig& config,
                          const CellOutcome& outcome);

struct SweepRow {
  CellKey key;
  bool ok = false;
  std::string status;  // "ok" or "error: <message>"
  eval::EvalResult eval;
};

struct Stat {
  double mean = 0.0;
  double std = 0.0;  // sample (n-1); 0 when n < 2
};

struct SweepAggregate {
  double rho = 0.0;
  engine::TrainingMode mode = engine::TrainingMode::kIrene;
  std::size_t n = 0;  // successful seeds
  Stat target_acc, leak_cotrained, leak_probe, chance, mi_final;
};

struct SweepResult {
  std::string config_hash;
  std::vector<SweepRow> rows;  // sorted by (rho, mode, seed)
  std::vector<SweepAggregate> aggregates;

  std::size_t failures() const;
};

Stat ComputeStat(const std::vector<double>& values);
std::vector<SweepAggregate> Aggregate(const std::vector<SweepRow>& rows);

// Runs the cross product sweep.rhos x sweep.modes x seeds on up to `workers`
// threads. Failed cells are recorded, not fatal. Writes sweep_rows.csv and
// sweep_aggregate.csv into `out_dir`.
SweepResult RunSweep(const ExperimentConfig& config,
                     const std::filesystem::path& out_dir, int workers);

void WriteSweepRows(const SweepResult& result, const std::filesystem::path& path);
void WriteSweepAggregate(const SweepResult& result,
                         const std::filesystem::path& path);
// Reads sweep_rows.csv and recomputes the aggregates.
SweepResult ReadSweepRows(const std::filesystem::path& path);

// Four CSVs, one per plot panel: target accuracy vs rho (a) and its
// zoomed y-range (b), leakage vs rho (c), leakage vs target accuracy (d).
void EmitPlotData(const SweepResult& result, const std::filesystem::path& out_dir);

}  // namespace irene::experiment

#endif  // IRENE_EXPERIMENT_H_
