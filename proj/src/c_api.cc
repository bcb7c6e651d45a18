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

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "irene/error.h"
#include "irene/experiment.h"
#include "irene/info_metrics.h"

struct irene_config {
  irene::experiment::ExperimentConfig value;
};

struct irene_run_result {
  irene::experiment::ExperimentConfig config;
  std::vector<irene::experiment::CellOutcome> outcomes;
};

struct irene_sweep_result {
  irene::experiment::SweepResult value;
};

namespace {

thread_local std::string last_error;

irene_status Fail(irene_status status, const char* message) {
  last_error = message;
  return status;
}

// Runs `fn`, translating exceptions into status codes.
template <typename Fn>
irene_status Guard(Fn&& fn) {
  try {
    last_error.clear();
    return fn();
  } catch (const irene::ConfigError& e) {
    return Fail(IRENE_ERR_CONFIG, e.what());
  } catch (const irene::IoError& e) {
    return Fail(IRENE_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return Fail(IRENE_ERR_RUNTIME, "out of memory");
  } catch (const std::exception& e) {
    return Fail(IRENE_ERR_RUNTIME, e.what());
  } catch (...) {
    return Fail(IRENE_ERR_RUNTIME, "unknown error");
  }
}

char* CopyString(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

irene_mode ToCMode(irene::engine::TrainingMode mode) {
  return mode == irene::engine::TrainingMode::kBaseline ? IRENE_MODE_BASELINE
                                                        : IRENE_MODE_IRENE;
}

irene_metrics ToMetrics(const irene::experiment::CellKey& key,
                        const irene::eval::EvalResult& r) {
  irene_metrics m{};
  m.rho = key.rho;
  m.seed = key.seed;
  m.mode = ToCMode(key.mode);
  m.target_accuracy = r.target_accuracy;
  m.leakage_accuracy_cotrained = r.leakage_accuracy_cotrained;
  m.leakage_accuracy_probe = r.leakage_accuracy_probe;
  m.chance_level = r.chance_level;
  m.mi_proxy_final = r.mi_proxy_final;
  m.n_eval = static_cast<int64_t>(r.n_eval);
  return m;
}

#define IRENE_REQUIRE(cond)                                              \
  do {                                                                   \
    if (!(cond)) return Fail(IRENE_ERR_CONFIG, "invalid argument: " #cond); \
  } while (0)

}  // namespace

extern "C" {

const char* irene_version(void) { return "1.0.0"; }

const char* irene_last_error(void) { return last_error.c_str(); }

void irene_string_free(char* s) { std::free(s); }

irene_status irene_config_default(irene_config** out) {
  IRENE_REQUIRE(out != nullptr);
  return Guard([&] {
    *out = new irene_config{irene::experiment::ExperimentConfig::Defaults()};
    return IRENE_OK;
  });
}

irene_status irene_config_parse(const char* json_text, irene_config** out) {
  IRENE_REQUIRE(json_text != nullptr && out != nullptr);
  return Guard([&] {
    *out = new irene_config{irene::experiment::ParseConfig(
        std::string_view(json_text))};
    return IRENE_OK;
  });
}

irene_status irene_config_load(const char* path, irene_config** out) {
  IRENE_REQUIRE(path != nullptr && out != nullptr);
  return Guard([&] {
    *out = new irene_config{irene::experiment::LoadConfig(path)};
    return IRENE_OK;
  });
}

void irene_config_free(irene_config* config) { delete config; }

irene_status irene_config_use_full_protocol(irene_config* config) {
  IRENE_REQUIRE(config != nullptr);
  return Guard([&] {
    config->value.UseFullProtocol();
    config->value.Validate();
    return IRENE_OK;
  });
}

irene_status irene_config_add_seed_offset(irene_config* config,
                                          uint64_t offset) {
  IRENE_REQUIRE(config != nullptr);
  return Guard([&] {
    config->value.ApplySeedOffset(offset);
    return IRENE_OK;
  });
}

irene_status irene_config_set_output(irene_config* config, const char* path) {
  IRENE_REQUIRE(config != nullptr && path != nullptr);
  return Guard([&] {
    config->value.output = path;
    return IRENE_OK;
  });
}

irene_status irene_config_set_workers(irene_config* config, int workers) {
  IRENE_REQUIRE(config != nullptr);
  IRENE_REQUIRE(workers >= 1);
  config->value.workers = workers;
  return IRENE_OK;
}

irene_status irene_config_get_output(const irene_config* config, char** out) {
  IRENE_REQUIRE(config != nullptr && out != nullptr);
  return Guard([&] {
    *out = CopyString(config->value.output);
    return IRENE_OK;
  });
}

irene_status irene_config_get_workers(const irene_config* config, int* out) {
  IRENE_REQUIRE(config != nullptr && out != nullptr);
  *out = config->value.workers;
  return IRENE_OK;
}

irene_status irene_config_to_json(const irene_config* config, char** out) {
  IRENE_REQUIRE(config != nullptr && out != nullptr);
  return Guard([&] {
    *out = CopyString(irene::experiment::ToJson(config->value).dump(2));
    return IRENE_OK;
  });
}

irene_status irene_config_hash(const irene_config* config, char** out) {
  IRENE_REQUIRE(config != nullptr && out != nullptr);
  return Guard([&] {
    *out = CopyString(irene::experiment::ConfigHash(config->value));
    return IRENE_OK;
  });
}

irene_status irene_run(const irene_config* config, const char* out_dir,
                       int export_data, irene_run_result** out) {
  IRENE_REQUIRE(config != nullptr && out_dir != nullptr && out != nullptr);
  return Guard([&] {
    auto result = std::make_unique<irene_run_result>();
    result->config = config->value;
    result->outcomes =
        irene::experiment::RunSingle(config->value, out_dir, export_data != 0);
    *out = result.release();
    return IRENE_OK;
  });
}

size_t irene_run_count(const irene_run_result* result) {
  return result == nullptr ? 0 : result->outcomes.size();
}

irene_status irene_run_metrics(const irene_run_result* result, size_t index,
                               irene_metrics* out) {
  IRENE_REQUIRE(result != nullptr && out != nullptr);
  IRENE_REQUIRE(index < result->outcomes.size());
  const auto& cell = result->outcomes[index];
  *out = ToMetrics(cell.key, cell.eval);
  return IRENE_OK;
}

irene_status irene_run_report_json(const irene_run_result* result,
                                   size_t index, char** out) {
  IRENE_REQUIRE(result != nullptr && out != nullptr);
  IRENE_REQUIRE(index < result->outcomes.size());
  return Guard([&] {
    *out = CopyString(irene::experiment::ReportJson(
                          result->config, result->outcomes[index])
                          .dump(2));
    return IRENE_OK;
  });
}

void irene_run_free(irene_run_result* result) { delete result; }

irene_status irene_sweep(const irene_config* config, const char* out_dir,
                         int workers, irene_sweep_result** out) {
  IRENE_REQUIRE(config != nullptr && out_dir != nullptr && out != nullptr);
  IRENE_REQUIRE(workers >= 1);
  return Guard([&] {
    auto result = std::make_unique<irene_sweep_result>();
    result->value = irene::experiment::RunSweep(config->value, out_dir, workers);
    const std::size_t failures = result->value.failures();
    *out = result.release();
    if (failures > 0) {
      return Fail(IRENE_ERR_PARTIAL,
                  (std::to_string(failures) + " sweep cell(s) failed").c_str());
    }
    return IRENE_OK;
  });
}

size_t irene_sweep_row_count(const irene_sweep_result* result) {
  return result == nullptr ? 0 : result->value.rows.size();
}

size_t irene_sweep_failure_count(const irene_sweep_result* result) {
  return result == nullptr ? 0 : result->value.failures();
}

irene_status irene_sweep_row(const irene_sweep_result* result, size_t index,
                             irene_metrics* out) {
  IRENE_REQUIRE(result != nullptr && out != nullptr);
  IRENE_REQUIRE(index < result->value.rows.size());
  const auto& row = result->value.rows[index];
  *out = ToMetrics(row.key, row.eval);
  if (!row.ok) return Fail(IRENE_ERR_RUNTIME, row.status.c_str());
  return IRENE_OK;
}

void irene_sweep_free(irene_sweep_result* result) { delete result; }

irene_status irene_plotdata(const char* sweep_rows_csv, const char* out_dir) {
  IRENE_REQUIRE(sweep_rows_csv != nullptr && out_dir != nullptr);
  return Guard([&] {
    irene::experiment::EmitPlotData(
        irene::experiment::ReadSweepRows(sweep_rows_csv), out_dir);
    return IRENE_OK;
  });
}

irene_status irene_mi_proxy(const double* soft_predictions,
                            const int32_t* labels, size_t batch, size_t n_pred,
                            size_t n_true, double* out) {
  IRENE_REQUIRE(soft_predictions != nullptr && labels != nullptr &&
                out != nullptr);
  return Guard([&] {
    irene::Tensor soft({batch, n_pred},
                       std::vector<double>(soft_predictions,
                                           soft_predictions + batch * n_pred));
    const std::vector<int> l(labels, labels + batch);
    *out = irene::info::MiProxyValue(soft, l, n_true);
    return IRENE_OK;
  });
}

irene_status irene_label_mi(const int64_t* counts, size_t k, size_t c,
                            double* out) {
  IRENE_REQUIRE(counts != nullptr && out != nullptr);
  return Guard([&] {
    irene::info::LabelJoint joint;
    joint.rows = k;
    joint.cols = c;
    joint.counts.assign(counts, counts + k * c);
    joint.total = 0;
    for (int64_t n : joint.counts) joint.total += n;
    *out = irene::info::LabelMi(joint);
    return IRENE_OK;
  });
}

}  // extern "C"
