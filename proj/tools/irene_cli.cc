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

// Command-line driver. Talks to the library only through the C interface.

#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>

#include "CLI11.hpp"
#include "irene/irene.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitPartial = 3;

int ExitCode(irene_status status) {
  switch (status) {
    case IRENE_OK:
      return kExitOk;
    case IRENE_ERR_CONFIG:
      return kExitConfig;
    case IRENE_ERR_PARTIAL:
      return kExitPartial;
    default:
      return kExitRuntime;
  }
}

int Report(irene_status status, const char* what) {
  if (status != IRENE_OK) {
    std::fprintf(stderr, "irene: %s: %s\n", what, irene_last_error());
  }
  return ExitCode(status);
}

struct ConfigDeleter {
  void operator()(irene_config* c) const { irene_config_free(c); }
};
using ConfigPtr = std::unique_ptr<irene_config, ConfigDeleter>;

struct OwnedString {
  char* s = nullptr;
  ~OwnedString() { irene_string_free(s); }
};

struct CommonOptions {
  std::string config_path;
  std::string out;
  int workers = 0;
  std::uint64_t seed_offset = 0;
  bool full_protocol = false;
};

void AddCommon(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config_path, "Config file (JSON)");
  cmd->add_option("--out", opts.out, "Output directory (overrides config)");
  cmd->add_option("--workers", opts.workers, "Worker threads")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed-offset", opts.seed_offset,
                  "Added to every configured seed");
  cmd->add_flag("--full-protocol", opts.full_protocol,
                "80 epochs, milestones [40, 60]");
}

// Loads the config and applies command-line overrides.
irene_status BuildConfig(const CommonOptions& opts, ConfigPtr& out) {
  irene_config* raw = nullptr;
  irene_status st = opts.config_path.empty()
                        ? irene_config_default(&raw)
                        : irene_config_load(opts.config_path.c_str(), &raw);
  if (st != IRENE_OK) return st;
  out.reset(raw);
  if (opts.full_protocol) {
    if ((st = irene_config_use_full_protocol(raw)) != IRENE_OK) return st;
  }
  if (opts.seed_offset != 0) {
    st = irene_config_add_seed_offset(raw, opts.seed_offset);
    if (st != IRENE_OK) return st;
  }
  if (!opts.out.empty()) {
    if ((st = irene_config_set_output(raw, opts.out.c_str())) != IRENE_OK) {
      return st;
    }
  }
  if (opts.workers > 0) {
    if ((st = irene_config_set_workers(raw, opts.workers)) != IRENE_OK) {
      return st;
    }
  }
  return IRENE_OK;
}

std::string OutputDir(const irene_config* config) {
  OwnedString s;
  if (irene_config_get_output(config, &s.s) != IRENE_OK) return "irene-out";
  return s.s;
}

const char* ModeName(irene_mode mode) {
  return mode == IRENE_MODE_BASELINE ? "baseline" : "irene";
}

void PrintMetrics(const irene_metrics& m) {
  std::printf(
      "rho=%.4g mode=%s seed=%llu target_acc=%.4f leak_cotrained=%.4f "
      "leak_probe=%.4f chance=%.4f mi_final=%.6g\n",
      m.rho, ModeName(m.mode), static_cast<unsigned long long>(m.seed),
      m.target_accuracy, m.leakage_accuracy_cotrained,
      m.leakage_accuracy_probe, m.chance_level, m.mi_proxy_final);
}

int DoRun(const CommonOptions& opts, bool export_data) {
  ConfigPtr config;
  irene_status st = BuildConfig(opts, config);
  if (st != IRENE_OK) return Report(st, "config");
  const std::string out = OutputDir(config.get());
  irene_run_result* result = nullptr;
  st = irene_run(config.get(), out.c_str(), export_data ? 1 : 0, &result);
  if (st != IRENE_OK) return Report(st, "run");
  for (size_t i = 0; i < irene_run_count(result); ++i) {
    irene_metrics m;
    if (irene_run_metrics(result, i, &m) == IRENE_OK) PrintMetrics(m);
  }
  irene_run_free(result);
  std::printf("wrote %s\n", out.c_str());
  return kExitOk;
}

int DoSweep(const CommonOptions& opts) {
  ConfigPtr config;
  irene_status st = BuildConfig(opts, config);
  if (st != IRENE_OK) return Report(st, "config");
  const std::string out = OutputDir(config.get());
  int workers = 1;
  irene_config_get_workers(config.get(), &workers);
  irene_sweep_result* result = nullptr;
  st = irene_sweep(config.get(), out.c_str(), workers, &result);
  if (result == nullptr) return Report(st, "sweep");
  const std::string sweep_error = st == IRENE_OK ? "" : irene_last_error();
  for (size_t i = 0; i < irene_sweep_row_count(result); ++i) {
    irene_metrics m;
    if (irene_sweep_row(result, i, &m) == IRENE_OK) {
      PrintMetrics(m);
    } else {
      std::fprintf(stderr, "irene: rho=%.4g mode=%s seed=%llu failed: %s\n",
                   m.rho, ModeName(m.mode),
                   static_cast<unsigned long long>(m.seed), irene_last_error());
    }
  }
  irene_sweep_free(result);
  if (st != IRENE_OK) {
    std::fprintf(stderr, "irene: sweep: %s\n", sweep_error.c_str());
    return ExitCode(st);
  }
  std::printf("wrote %s\n", out.c_str());
  return kExitOk;
}

int DoPlotData(const std::string& rows, const std::string& out) {
  const std::string rows_path = rows.empty() ? out + "/sweep_rows.csv" : rows;
  const irene_status st = irene_plotdata(rows_path.c_str(), out.c_str());
  if (st != IRENE_OK) return Report(st, "plotdata");
  std::printf("wrote %s\n", out.c_str());
  return kExitOk;
}

int DoConfig(const CommonOptions& opts, bool print_defaults) {
  ConfigPtr config;
  irene_status st;
  if (print_defaults) {
    irene_config* raw = nullptr;
    st = irene_config_default(&raw);
    config.reset(raw);
  } else {
    st = BuildConfig(opts, config);
  }
  if (st != IRENE_OK) return Report(st, "config");
  OwnedString text, hash;
  if ((st = irene_config_to_json(config.get(), &text.s)) != IRENE_OK) {
    return Report(st, "config");
  }
  if ((st = irene_config_hash(config.get(), &hash.s)) != IRENE_OK) {
    return Report(st, "config");
  }
  std::printf("%s\n", text.s);
  std::fprintf(stderr, "config_hash %s\n", hash.s);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Private-attribute removal at the bottleneck: runs and sweeps"};
  app.set_version_flag("--version", irene_version());
  app.require_subcommand(1);

  CommonOptions run_opts;
  bool export_data = false;
  auto* run = app.add_subcommand("run", "Train and evaluate one cell per seed");
  AddCommon(run, run_opts);
  run->add_flag("--export-data", export_data, "Also write the dataset CSV");

  CommonOptions sweep_opts;
  auto* sweep = app.add_subcommand("sweep", "Run the rho x mode x seed sweep");
  AddCommon(sweep, sweep_opts);

  std::string plot_rows;
  std::string plot_out = "irene-out";
  auto* plot = app.add_subcommand("plotdata", "Write per-panel CSVs");
  plot->add_option("--rows", plot_rows,
                   "sweep_rows.csv (default: <out>/sweep_rows.csv)");
  plot->add_option("--out", plot_out, "Output directory");

  CommonOptions config_opts;
  bool print_defaults = false;
  auto* config = app.add_subcommand(
      "config", "Validate and print a config with its hash");
  AddCommon(config, config_opts);
  config->add_flag("--print-defaults", print_defaults,
                   "Print the documented defaults");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (*run) return DoRun(run_opts, export_data);
  if (*sweep) return DoSweep(sweep_opts);
  if (*plot) return DoPlotData(plot_rows, plot_out);
  return DoConfig(config_opts, print_defaults);
}
