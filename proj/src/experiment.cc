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

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "irene/csv.h"
#include "irene/error.h"
#include "irene/rng.h"

namespace irene::experiment {
namespace {

using json = nlohmann::json;

// Stream indices for the per-seed generators.
constexpr std::uint64_t kInitStream = 101;
constexpr std::uint64_t kShuffleStream = 102;
constexpr std::uint64_t kProbeStream = 103;

void CheckKeys(const json& obj, std::string_view where,
               std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) {
    throw ConfigError(std::string(where) + ": expected an object");
  }
  for (const auto& item : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) ==
        allowed.end()) {
      throw ConfigError(std::string(where) + ": unknown key '" + item.key() +
                        "'");
    }
  }
}

std::string Where(std::string_view section, const char* key) {
  return std::string(section) + "." + key;
}

void Read(const json& obj, std::string_view section, const char* key,
          double& out) {
  const auto it = obj.find(key);
  if (it == obj.end()) return;
  if (!it->is_number()) throw ConfigError(Where(section, key) + ": expected a number");
  out = it->get<double>();
}

void Read(const json& obj, std::string_view section, const char* key,
          int& out) {
  const auto it = obj.find(key);
  if (it == obj.end()) return;
  if (!it->is_number_integer()) {
    throw ConfigError(Where(section, key) + ": expected an integer");
  }
  out = it->get<int>();
}

void Read(const json& obj, std::string_view section, const char* key,
          std::size_t& out) {
  const auto it = obj.find(key);
  if (it == obj.end()) return;
  if (!it->is_number_unsigned()) {
    throw ConfigError(Where(section, key) +
                      ": expected a non-negative integer");
  }
  out = it->get<std::size_t>();
}

void Read(const json& obj, std::string_view section, const char* key,
          bool& out) {
  const auto it = obj.find(key);
  if (it == obj.end()) return;
  if (!it->is_boolean()) throw ConfigError(Where(section, key) + ": expected a boolean");
  out = it->get<bool>();
}

void Read(const json& obj, std::string_view section, const char* key,
          std::vector<std::size_t>& out) {
  const auto it = obj.find(key);
  if (it == obj.end()) return;
  if (!it->is_array()) throw ConfigError(Where(section, key) + ": expected an array");
  out.clear();
  for (const auto& e : *it) {
    if (!e.is_number_unsigned()) {
      throw ConfigError(Where(section, key) +
                        ": expected non-negative integers");
    }
    out.push_back(e.get<std::size_t>());
  }
}

void Read(const json& obj, std::string_view section, const char* key,
          std::vector<int>& out) {
  const auto it = obj.find(key);
  if (it == obj.end()) return;
  if (!it->is_array()) throw ConfigError(Where(section, key) + ": expected an array");
  out.clear();
  for (const auto& e : *it) {
    if (!e.is_number_integer()) {
      throw ConfigError(Where(section, key) + ": expected integers");
    }
    out.push_back(e.get<int>());
  }
}

void Read(const json& obj, std::string_view section, const char* key,
          std::vector<double>& out) {
  const auto it = obj.find(key);
  if (it == obj.end()) return;
  if (!it->is_array()) throw ConfigError(Where(section, key) + ": expected an array");
  out.clear();
  for (const auto& e : *it) {
    if (!e.is_number()) throw ConfigError(Where(section, key) + ": expected numbers");
    out.push_back(e.get<double>());
  }
}

nn::SgdConfig ParseSgd(const json& j, std::string_view where,
                       nn::SgdConfig sgd) {
  CheckKeys(j, where,
            {"learning_rate", "momentum", "weight_decay", "milestones",
             "decay_factor"});
  Read(j, where, "learning_rate", sgd.learning_rate);
  Read(j, where, "momentum", sgd.momentum);
  Read(j, where, "weight_decay", sgd.weight_decay);
  Read(j, where, "milestones", sgd.milestones);
  Read(j, where, "decay_factor", sgd.decay_factor);
  return sgd;
}

json SgdJson(const nn::SgdConfig& sgd) {
  return {{"learning_rate", sgd.learning_rate},
          {"momentum", sgd.momentum},
          {"weight_decay", sgd.weight_decay},
          {"milestones", sgd.milestones},
          {"decay_factor", sgd.decay_factor}};
}

json EvalJson(const eval::EvalResult& r) {
  return {{"target_accuracy", r.target_accuracy},
          {"leakage_accuracy_cotrained", r.leakage_accuracy_cotrained},
          {"leakage_accuracy_probe", r.leakage_accuracy_probe},
          {"chance_level", r.chance_level},
          {"mi_proxy_final", r.mi_proxy_final},
          {"n_eval", r.n_eval}};
}

std::string Sha256Hex(const std::string& text) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(),
                 nullptr) != 1) {
    throw Error("sha256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xf];
  }
  return out;
}

void EnsureDirectory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw IoError("cannot create output directory " + dir.string() + ": " +
                  ec.message());
  }
}

std::ofstream OpenForWrite(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

std::string SeedTag(std::uint64_t seed) { return "seed" + std::to_string(seed); }

bool CellLess(const CellKey& a, const CellKey& b) {
  return std::tuple(a.rho, static_cast<int>(a.mode), a.seed) <
         std::tuple(b.rho, static_cast<int>(b.mode), b.seed);
}

}  // namespace

void ExperimentConfig::Validate() const {
  data.Validate();
  model.Validate();
  train.Validate();
  probe.Validate();
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() !=
      seeds.size()) {
    throw ConfigError("duplicate seed in seeds");
  }
  if (sweep.rhos.empty()) throw ConfigError("sweep.rhos must not be empty");
  if (sweep.modes.empty()) throw ConfigError("sweep.modes must not be empty");
  for (double rho : sweep.rhos) {
    data::BiasConfig probe_config = data;
    probe_config.rho = rho;
    probe_config.Validate();
  }
  if (data.n_samples == 0) throw ConfigError("data.n_samples must be > 0");
  if (data.n_test == 0) throw ConfigError("data.n_test must be > 0");
  if (workers < 1) throw ConfigError("workers must be >= 1");
}

ExperimentConfig ExperimentConfig::Defaults() {
  ExperimentConfig c;
  c.train.sgd.milestones = {15, 22};
  return c;
}

void ExperimentConfig::UseFullProtocol() {
  train.epochs = 80;
  train.sgd.milestones = {40, 60};
}

void ExperimentConfig::ApplySeedOffset(std::uint64_t offset) {
  for (std::uint64_t& s : seeds) s += offset;
}

ExperimentConfig ParseConfig(const json& j) {
  ExperimentConfig c = ExperimentConfig::Defaults();
  CheckKeys(j, "config",
            {"data", "model", "train", "probe", "mode", "seeds", "sweep",
             "output", "workers"});
  try {
    if (j.contains("data")) {
      const json& d = j["data"];
      CheckKeys(d, "data",
                {"n_samples", "n_val", "n_test", "target_classes",
                 "private_classes", "rho", "pattern_dim", "color_dim",
                 "pattern_signal", "color_signal", "noise_sigma"});
      Read(d, "data", "n_samples", c.data.n_samples);
      Read(d, "data", "n_val", c.data.n_val);
      Read(d, "data", "n_test", c.data.n_test);
      Read(d, "data", "target_classes", c.data.target_classes);
      Read(d, "data", "private_classes", c.data.private_classes);
      Read(d, "data", "rho", c.data.rho);
      Read(d, "data", "pattern_dim", c.data.pattern_dim);
      Read(d, "data", "color_dim", c.data.color_dim);
      Read(d, "data", "pattern_signal", c.data.pattern_signal);
      Read(d, "data", "color_signal", c.data.color_signal);
      Read(d, "data", "noise_sigma", c.data.noise_sigma);
    }
    if (j.contains("model")) {
      const json& m = j["model"];
      CheckKeys(m, "model",
                {"encoder_hidden", "bottleneck", "bottleneck_relu",
                 "head_hidden"});
      Read(m, "model", "encoder_hidden", c.model.encoder_hidden);
      Read(m, "model", "bottleneck", c.model.bottleneck);
      Read(m, "model", "bottleneck_relu", c.model.bottleneck_relu);
      Read(m, "model", "head_hidden", c.model.head_hidden);
    }
    if (j.contains("train")) {
      const json& t = j["train"];
      CheckKeys(t, "train",
                {"alpha", "gamma", "epochs", "batch_size", "mi_marginal",
                 "sgd"});
      Read(t, "train", "alpha", c.train.alpha);
      Read(t, "train", "gamma", c.train.gamma);
      Read(t, "train", "epochs", c.train.epochs);
      Read(t, "train", "batch_size", c.train.batch_size);
      if (t.contains("mi_marginal")) {
        const std::string m = t["mi_marginal"].get<std::string>();
        if (m == "batch") {
          c.train.marginal = engine::MarginalSource::kBatch;
        } else if (m == "dataset_prior") {
          c.train.marginal = engine::MarginalSource::kDatasetPrior;
        } else {
          throw ConfigError("train.mi_marginal: expected batch or dataset_prior");
        }
      }
      if (t.contains("sgd")) c.train.sgd = ParseSgd(t["sgd"], "train.sgd", c.train.sgd);
    }
    if (j.contains("probe")) {
      const json& p = j["probe"];
      CheckKeys(p, "probe", {"epochs", "batch_size", "hidden", "sgd"});
      Read(p, "probe", "epochs", c.probe.epochs);
      Read(p, "probe", "batch_size", c.probe.batch_size);
      Read(p, "probe", "hidden", c.probe.hidden);
      if (p.contains("sgd")) c.probe.sgd = ParseSgd(p["sgd"], "probe.sgd", c.probe.sgd);
    }
    if (j.contains("mode")) c.mode = engine::ParseMode(j["mode"].get<std::string>());
    if (j.contains("seeds")) {
      const json& s = j["seeds"];
      if (!s.is_array()) throw ConfigError("seeds: expected an array");
      c.seeds.clear();
      for (const auto& e : s) {
        if (!e.is_number_unsigned()) {
          throw ConfigError("seeds: expected non-negative integers");
        }
        c.seeds.push_back(e.get<std::uint64_t>());
      }
    }
    if (j.contains("sweep")) {
      const json& s = j["sweep"];
      CheckKeys(s, "sweep", {"rhos", "modes"});
      Read(s, "sweep", "rhos", c.sweep.rhos);
      if (s.contains("modes")) {
        if (!s["modes"].is_array()) throw ConfigError("sweep.modes: expected an array");
        c.sweep.modes.clear();
        for (const auto& m : s["modes"]) {
          c.sweep.modes.push_back(engine::ParseMode(m.get<std::string>()));
        }
      }
    }
    if (j.contains("output")) c.output = j["output"].get<std::string>();
    Read(j, "config", "workers", c.workers);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  c.Validate();
  return c;
}

ExperimentConfig ParseConfig(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return ParseConfig(j);
}

ExperimentConfig LoadConfig(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  return ParseConfig(std::string_view(text));
}

json ToJson(const ExperimentConfig& c) {
  json modes = json::array();
  for (auto m : c.sweep.modes) modes.push_back(engine::ModeName(m));
  return {
      {"data",
       {{"n_samples", c.data.n_samples},
        {"n_val", c.data.n_val},
        {"n_test", c.data.n_test},
        {"target_classes", c.data.target_classes},
        {"private_classes", c.data.private_classes},
        {"rho", c.data.rho},
        {"pattern_dim", c.data.pattern_dim},
        {"color_dim", c.data.color_dim},
        {"pattern_signal", c.data.pattern_signal},
        {"color_signal", c.data.color_signal},
        {"noise_sigma", c.data.noise_sigma}}},
      {"model",
       {{"encoder_hidden", c.model.encoder_hidden},
        {"bottleneck", c.model.bottleneck},
        {"bottleneck_relu", c.model.bottleneck_relu},
        {"head_hidden", c.model.head_hidden}}},
      {"train",
       {{"alpha", c.train.alpha},
        {"gamma", c.train.gamma},
        {"epochs", c.train.epochs},
        {"batch_size", c.train.batch_size},
        {"mi_marginal", c.train.marginal == engine::MarginalSource::kBatch
                            ? "batch"
                            : "dataset_prior"},
        {"sgd", SgdJson(c.train.sgd)}}},
      {"probe",
       {{"epochs", c.probe.epochs},
        {"batch_size", c.probe.batch_size},
        {"hidden", c.probe.hidden},
        {"sgd", SgdJson(c.probe.sgd)}}},
      {"mode", engine::ModeName(c.mode)},
      {"seeds", c.seeds},
      {"sweep", {{"rhos", c.sweep.rhos}, {"modes", modes}}},
      {"output", c.output},
      {"workers", c.workers},
  };
}

std::string ConfigHash(const ExperimentConfig& config) {
  json j = ToJson(config);
  j.erase("output");
  j.erase("workers");
  return Sha256Hex(j.dump());
}

CellOutcome RunCell(const ExperimentConfig& config, const CellKey& key) {
  data::BiasConfig dc = config.data;
  dc.rho = key.rho;
  dc.seed = key.seed;
  const data::BiasedDataset dataset = data::Generate(dc);
  const data::LabeledSet train = dataset.Extract(data::Split::kTrain);
  const data::LabeledSet test = dataset.Extract(data::Split::kTest);

  CellOutcome out;
  out.key = key;
  engine::ModelTriple model = engine::ModelTriple::Create(
      config.model, dc.feature_dim(), dc.target_classes, dc.private_classes,
      StreamKey(key.seed, kInitStream));
  engine::TrainOptions options;
  options.mode = key.mode;
  options.shuffle_seed = StreamKey(key.seed, kShuffleStream);
  out.trace =
      engine::Train(model, train, dc.private_classes, config.train, options);
  const nn::Mlp probe =
      eval::TrainProbe(model.encoder, train, dc.private_classes, config.probe,
                       StreamKey(key.seed, kProbeStream));
  out.eval = eval::Evaluate(model, test, probe, dc.private_classes);
  out.model = std::move(model);
  out.ok = true;
  return out;
}

json ReportJson(const ExperimentConfig& config, const CellOutcome& outcome) {
  json trace = json::array();
  for (const auto& r : outcome.trace) {
    trace.push_back({{"epoch", r.epoch},
                     {"target_loss", r.target_loss},
                     {"private_ce", r.private_ce},
                     {"mi_proxy", r.mi_proxy},
                     {"learning_rate", r.learning_rate}});
  }
  return {
      {"config_hash", ConfigHash(config)},
      {"config", ToJson(config)},
      {"seed", outcome.key.seed},
      {"rho", outcome.key.rho},
      {"mode", engine::ModeName(outcome.key.mode)},
      {"metrics", EvalJson(outcome.eval)},
      {"trace", std::move(trace)},
      {"notes",
       {{"initialization", "weights uniform(+-sqrt(6/fan_in)), biases zero"},
        {"weight_decay_on_biases", true},
        {"same_sgd_config_for_all_groups", true},
        {"test_split", "unbiased: rho = 1/C"},
        {"probe", "fresh head fit on frozen train-split bottleneck"},
        {"last_partial_batch", "kept"},
        {"lr_schedule", "fixed milestones; plateau decay not implemented"}}},
  };
}

std::vector<CellOutcome> RunSingle(const ExperimentConfig& config,
                                   const std::filesystem::path& out_dir,
                                   bool export_data) {
  config.Validate();
  EnsureDirectory(out_dir);
  const std::string hash = ConfigHash(config);
  std::vector<CellOutcome> outcomes;
  for (std::uint64_t seed : config.seeds) {
    CellOutcome cell = RunCell(config, {config.data.rho, config.mode, seed});
    const std::string tag = SeedTag(seed);

    {
      std::ofstream out = OpenForWrite(out_dir / ("report_" + tag + ".json"));
      out << ReportJson(config, cell).dump(2) << '\n';
    }
    {
      std::ofstream out = OpenForWrite(out_dir / ("trace_" + tag + ".csv"));
      csv::WriteRow(out, {"epoch", "target_loss", "private_ce", "mi_proxy",
                          "learning_rate", "config_hash"});
      for (const auto& r : cell.trace) {
        csv::WriteRow(out, {std::to_string(r.epoch),
                            csv::FormatDouble(r.target_loss),
                            csv::FormatDouble(r.private_ce),
                            csv::FormatDouble(r.mi_proxy),
                            csv::FormatDouble(r.learning_rate), hash});
      }
    }
    engine::SaveCheckpoint(*cell.model, config.train.epochs,
                           out_dir / ("checkpoint_" + tag + ".json"));
    if (export_data) {
      data::BiasConfig dc = config.data;
      dc.seed = seed;
      data::WriteCsv(data::Generate(dc), out_dir / ("data_" + tag + ".csv"));
    }
    outcomes.push_back(std::move(cell));
  }
  return outcomes;
}

std::size_t SweepResult::failures() const {
  return static_cast<std::size_t>(std::count_if(
      rows.begin(), rows.end(), [](const SweepRow& r) { return !r.ok; }));
}

Stat ComputeStat(const std::vector<double>& values) {
  Stat s;
  if (values.empty()) {
    s.mean = std::nan("");
    return s;
  }
  double total = 0.0;
  for (double v : values) total += v;
  s.mean = total / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

std::vector<SweepAggregate> Aggregate(const std::vector<SweepRow>& rows) {
  std::map<std::pair<double, int>, std::vector<const SweepRow*>> cells;
  for (const SweepRow& r : rows) {
    cells[{r.key.rho, static_cast<int>(r.key.mode)}].push_back(&r);
  }
  std::vector<SweepAggregate> out;
  for (const auto& [key, members] : cells) {
    std::vector<double> target, leak_h, leak_p, chance, mi;
    for (const SweepRow* r : members) {
      if (!r->ok) continue;
      target.push_back(r->eval.target_accuracy);
      leak_h.push_back(r->eval.leakage_accuracy_cotrained);
      leak_p.push_back(r->eval.leakage_accuracy_probe);
      chance.push_back(r->eval.chance_level);
      mi.push_back(r->eval.mi_proxy_final);
    }
    SweepAggregate a;
    a.rho = key.first;
    a.mode = static_cast<engine::TrainingMode>(key.second);
    a.n = target.size();
    a.target_acc = ComputeStat(target);
    a.leak_cotrained = ComputeStat(leak_h);
    a.leak_probe = ComputeStat(leak_p);
    a.chance = ComputeStat(chance);
    a.mi_final = ComputeStat(mi);
    out.push_back(a);
  }
  return out;
}

SweepResult RunSweep(const ExperimentConfig& config,
                     const std::filesystem::path& out_dir, int workers) {
  config.Validate();
  if (workers < 1) throw ConfigError("workers must be >= 1");
  EnsureDirectory(out_dir);

  std::vector<CellKey> cells;
  for (double rho : config.sweep.rhos) {
    for (auto mode : config.sweep.modes) {
      for (std::uint64_t seed : config.seeds) cells.push_back({rho, mode, seed});
    }
  }
  std::vector<SweepRow> rows(cells.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      SweepRow& row = rows[i];
      row.key = cells[i];
      try {
        row.eval = RunCell(config, cells[i]).eval;
        row.ok = true;
        row.status = "ok";
      } catch (const std::exception& e) {
        row.ok = false;
        row.status = std::string("error: ") + e.what();
      }
    }
  };
  const int n_threads =
      std::min<int>(workers, static_cast<int>(std::max<std::size_t>(cells.size(), 1)));
  std::vector<std::thread> pool;
  for (int t = 1; t < n_threads; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  std::sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return CellLess(a.key, b.key);
  });
  SweepResult result;
  result.config_hash = ConfigHash(config);
  result.rows = std::move(rows);
  result.aggregates = Aggregate(result.rows);
  WriteSweepRows(result, out_dir / "sweep_rows.csv");
  WriteSweepAggregate(result, out_dir / "sweep_aggregate.csv");
  return result;
}

void WriteSweepRows(const SweepResult& result,
                    const std::filesystem::path& path) {
  std::ofstream out = OpenForWrite(path);
  csv::WriteRow(out, {"rho", "mode", "seed", "target_acc", "leak_cotrained",
                      "leak_probe", "chance", "mi_final", "status",
                      "config_hash"});
  for (const SweepRow& r : result.rows) {
    auto num = [&](double v) { return r.ok ? csv::FormatDouble(v) : ""; };
    csv::WriteRow(out, {csv::FormatDouble(r.key.rho),
                        std::string(engine::ModeName(r.key.mode)),
                        std::to_string(r.key.seed),
                        num(r.eval.target_accuracy),
                        num(r.eval.leakage_accuracy_cotrained),
                        num(r.eval.leakage_accuracy_probe),
                        num(r.eval.chance_level), num(r.eval.mi_proxy_final),
                        r.status, result.config_hash});
  }
  if (!out) throw IoError("write failed for " + path.string());
}

void WriteSweepAggregate(const SweepResult& result,
                         const std::filesystem::path& path) {
  std::ofstream out = OpenForWrite(path);
  csv::WriteRow(out, {"rho", "mode", "n", "target_acc_mean", "target_acc_std",
                      "leak_cotrained_mean", "leak_cotrained_std",
                      "leak_probe_mean", "leak_probe_std", "chance_mean",
                      "mi_final_mean", "mi_final_std", "config_hash"});
  for (const SweepAggregate& a : result.aggregates) {
    const auto f = csv::FormatDouble;
    csv::WriteRow(out, {f(a.rho), std::string(engine::ModeName(a.mode)),
                        std::to_string(a.n), f(a.target_acc.mean),
                        f(a.target_acc.std), f(a.leak_cotrained.mean),
                        f(a.leak_cotrained.std), f(a.leak_probe.mean),
                        f(a.leak_probe.std), f(a.chance.mean),
                        f(a.mi_final.mean), f(a.mi_final.std),
                        result.config_hash});
  }
  if (!out) throw IoError("write failed for " + path.string());
}

SweepResult ReadSweepRows(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  const auto table = csv::Parse(in);
  if (table.empty()) throw IoError(path.string() + ": empty file");

  const csv::Row& header = table[0];
  auto column = [&](std::string_view name) -> std::optional<std::size_t> {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::vector<std::string_view> required{
      "rho", "mode", "seed", "target_acc", "leak_cotrained", "leak_probe",
      "chance", "mi_final"};
  std::string missing;
  std::map<std::string_view, std::size_t> idx;
  for (auto name : required) {
    if (auto c = column(name)) {
      idx[name] = *c;
    } else {
      missing += (missing.empty() ? "" : ", ") + std::string(name);
    }
  }
  if (!missing.empty()) {
    throw IoError(path.string() + ": missing columns: " + missing);
  }
  const auto status_col = column("status");
  const auto hash_col = column("config_hash");

  SweepResult result;
  for (std::size_t r = 1; r < table.size(); ++r) {
    const csv::Row& row = table[r];
    if (row.size() != header.size()) {
      throw IoError(path.string() + ": row " + std::to_string(r) +
                    " has the wrong number of fields");
    }
    SweepRow s;
    s.key.rho = csv::ParseDouble(row[idx["rho"]]);
    s.key.mode = engine::ParseMode(row[idx["mode"]]);
    s.key.seed = std::stoull(row[idx["seed"]]);
    s.status = status_col ? row[*status_col] : "ok";
    s.ok = s.status == "ok";
    if (s.ok) {
      s.eval.target_accuracy = csv::ParseDouble(row[idx["target_acc"]]);
      s.eval.leakage_accuracy_cotrained =
          csv::ParseDouble(row[idx["leak_cotrained"]]);
      s.eval.leakage_accuracy_probe = csv::ParseDouble(row[idx["leak_probe"]]);
      s.eval.chance_level = csv::ParseDouble(row[idx["chance"]]);
      s.eval.mi_proxy_final = csv::ParseDouble(row[idx["mi_final"]]);
    }
    if (hash_col && result.config_hash.empty()) {
      result.config_hash = row[*hash_col];
    }
    result.rows.push_back(std::move(s));
  }
  std::sort(result.rows.begin(), result.rows.end(),
            [](const SweepRow& a, const SweepRow& b) {
              return CellLess(a.key, b.key);
            });
  result.aggregates = Aggregate(result.rows);
  return result;
}

void EmitPlotData(const SweepResult& result,
                  const std::filesystem::path& out_dir) {
  EnsureDirectory(out_dir);
  const auto f = csv::FormatDouble;
  const std::string& hash = result.config_hash;

  {
    std::ofstream out = OpenForWrite(out_dir / "panel_a_target_vs_rho.csv");
    csv::WriteRow(out, {"rho", "mode", "n", "target_acc_mean",
                        "target_acc_std", "config_hash"});
    for (const auto& a : result.aggregates) {
      csv::WriteRow(out, {f(a.rho), std::string(engine::ModeName(a.mode)),
                          std::to_string(a.n), f(a.target_acc.mean),
                          f(a.target_acc.std), hash});
    }
  }
  {
    // Same series as (a) with the y-window that brackets every mean +- std.
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& a : result.aggregates) {
      if (a.n == 0) continue;
      lo = std::min(lo, a.target_acc.mean - a.target_acc.std);
      hi = std::max(hi, a.target_acc.mean + a.target_acc.std);
    }
    std::ofstream out =
        OpenForWrite(out_dir / "panel_b_target_vs_rho_zoom.csv");
    csv::WriteRow(out, {"rho", "mode", "n", "target_acc_mean",
                        "target_acc_std", "y_min", "y_max", "config_hash"});
    for (const auto& a : result.aggregates) {
      csv::WriteRow(out, {f(a.rho), std::string(engine::ModeName(a.mode)),
                          std::to_string(a.n), f(a.target_acc.mean),
                          f(a.target_acc.std), f(lo), f(hi), hash});
    }
  }
  {
    std::ofstream out = OpenForWrite(out_dir / "panel_c_leakage_vs_rho.csv");
    csv::WriteRow(out, {"rho", "mode", "n", "leak_cotrained_mean",
                        "leak_cotrained_std", "leak_probe_mean",
                        "leak_probe_std", "chance", "config_hash"});
    for (const auto& a : result.aggregates) {
      csv::WriteRow(out, {f(a.rho), std::string(engine::ModeName(a.mode)),
                          std::to_string(a.n), f(a.leak_cotrained.mean),
                          f(a.leak_cotrained.std), f(a.leak_probe.mean),
                          f(a.leak_probe.std), f(a.chance.mean), hash});
    }
  }
  {
    std::ofstream out =
        OpenForWrite(out_dir / "panel_d_leakage_vs_target.csv");
    csv::WriteRow(out, {"rho", "mode", "target_acc_mean",
                        "leak_cotrained_mean", "config_hash"});
    for (const auto& a : result.aggregates) {
      csv::WriteRow(out, {f(a.rho), std::string(engine::ModeName(a.mode)),
                          f(a.target_acc.mean), f(a.leak_cotrained.mean),
                          hash});
    }
  }
}

}  // namespace irene::experiment
