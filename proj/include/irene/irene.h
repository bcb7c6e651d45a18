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

/*
 * C interface of the irene library.
 *
 * Objects are opaque handles created by irene_*_create/load/run functions and
 * released by the matching irene_*_free. Every fallible call returns an
 * irene_status; on failure irene_last_error() describes the problem (the
 * message is thread-local and valid until the next call on the same thread).
 * Strings returned through char** out-parameters are owned by the caller and
 * must be released with irene_string_free().
 */
#ifndef IRENE_IRENE_H_
#define IRENE_IRENE_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define IRENE_API __declspec(dllexport)
#elif defined(__GNUC__)
#define IRENE_API __attribute__((visibility("default")))
#else
#define IRENE_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum irene_status {
  IRENE_OK = 0,
  IRENE_ERR_CONFIG = 1,         /* invalid configuration or argument */
  IRENE_ERR_RUNTIME = 2,        /* numeric, shape or internal failure */
  IRENE_ERR_PARTIAL = 3,        /* sweep finished with failed cells */
  IRENE_ERR_IO = 4,             /* file system failure */
} irene_status;

typedef enum irene_mode {
  IRENE_MODE_BASELINE = 0,
  IRENE_MODE_IRENE = 1,
} irene_mode;

typedef struct irene_config irene_config;
typedef struct irene_run_result irene_run_result;
typedef struct irene_sweep_result irene_sweep_result;

typedef struct irene_metrics {
  double rho;
  uint64_t seed;
  irene_mode mode;
  double target_accuracy;
  double leakage_accuracy_cotrained;
  double leakage_accuracy_probe;
  double chance_level;
  double mi_proxy_final;
  int64_t n_eval;
} irene_metrics;

IRENE_API const char* irene_version(void);
IRENE_API const char* irene_last_error(void);
IRENE_API void irene_string_free(char* s);

/* Configuration ---------------------------------------------------------- */

IRENE_API irene_status irene_config_default(irene_config** out);
IRENE_API irene_status irene_config_parse(const char* json_text,
                                          irene_config** out);
IRENE_API irene_status irene_config_load(const char* path, irene_config** out);
IRENE_API void irene_config_free(irene_config* config);

/* Switches to the 80-epoch schedule with milestones [40, 60]. */
IRENE_API irene_status irene_config_use_full_protocol(irene_config* config);
IRENE_API irene_status irene_config_add_seed_offset(irene_config* config,
                                                    uint64_t offset);
IRENE_API irene_status irene_config_set_output(irene_config* config,
                                               const char* path);
IRENE_API irene_status irene_config_set_workers(irene_config* config,
                                                int workers);
IRENE_API irene_status irene_config_get_output(const irene_config* config,
                                               char** out);
IRENE_API irene_status irene_config_get_workers(const irene_config* config,
                                                int* out);
/* Pretty-printed JSON of the full configuration. */
IRENE_API irene_status irene_config_to_json(const irene_config* config,
                                            char** out);
IRENE_API irene_status irene_config_hash(const irene_config* config,
                                         char** out);

/* Runs ----------------------------------------------------------------- */

/* One run per configured seed; writes reports, traces and checkpoints into
 * out_dir (created if needed). export_data != 0 also writes the dataset CSV. */
IRENE_API irene_status irene_run(const irene_config* config, const char* out_dir,
                                 int export_data, irene_run_result** out);
IRENE_API size_t irene_run_count(const irene_run_result* result);
IRENE_API irene_status irene_run_metrics(const irene_run_result* result,
                                         size_t index, irene_metrics* out);
/* JSON report of run `index` (identical to the file written by irene_run). */
IRENE_API irene_status irene_run_report_json(const irene_run_result* result,
                                             size_t index, char** out);
IRENE_API void irene_run_free(irene_run_result* result);

/* Runs the rho x mode x seed cross product on `workers` threads. Returns
 * IRENE_ERR_PARTIAL (with *out populated) when some cells failed. */
IRENE_API irene_status irene_sweep(const irene_config* config,
                                   const char* out_dir, int workers,
                                   irene_sweep_result** out);
IRENE_API size_t irene_sweep_row_count(const irene_sweep_result* result);
IRENE_API size_t irene_sweep_failure_count(const irene_sweep_result* result);
/* Returns IRENE_ERR_RUNTIME for a failed row; irene_last_error() then holds
 * the row's error message. */
IRENE_API irene_status irene_sweep_row(const irene_sweep_result* result,
                                       size_t index, irene_metrics* out);
IRENE_API void irene_sweep_free(irene_sweep_result* result);

/* Reads sweep_rows.csv and writes the four panel CSVs into out_dir. */
IRENE_API irene_status irene_plotdata(const char* sweep_rows_csv,
                                      const char* out_dir);

/* Numerics ------------------------------------------------------------- */

/* MI proxy (nats) of soft predictions [batch x n_pred] (rows sum to 1)
 * against integer labels in [0, n_true). */
IRENE_API irene_status irene_mi_proxy(const double* soft_predictions,
                                      const int32_t* labels, size_t batch,
                                      size_t n_pred, size_t n_true,
                                      double* out);
/* Mutual information (nats) of a [k x c] count table. */
IRENE_API irene_status irene_label_mi(const int64_t* counts, size_t k,
                                      size_t c, double* out);

#ifdef __cplusplus
}  /* extern "C" */
#endif

#endif  /* IRENE_IRENE_H_ */
