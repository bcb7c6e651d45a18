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

#include "irene/datagen.h"

#include <cmath>
#include <fstream>
#include <string>

#include "irene/csv.h"
#include "irene/error.h"
#include "irene/rng.h"

namespace irene::data {
namespace {

// Stream indices above every plausible sample index.
constexpr std::uint64_t kPatternStreams = 1ULL << 62;
constexpr std::uint64_t kColorStreams = (1ULL << 62) + (1ULL << 32);

std::vector<double> UnitTemplate(std::uint64_t seed, std::uint64_t stream,
                                 std::size_t dim) {
  SplitMix64 rng(seed, stream);
  std::vector<double> v(dim);
  double norm2 = 0.0;
  do {
    norm2 = 0.0;
    for (double& x : v) {
      x = rng.Gaussian();
      norm2 += x * x;
    }
  } while (norm2 == 0.0);
  const double inv = 1.0 / std::sqrt(norm2);
  for (double& x : v) x *= inv;
  return v;
}

}  // namespace

void BiasConfig::Validate() const {
  if (target_classes < 2 || private_classes < 2) {
    throw ConfigError("target_classes and private_classes must be >= 2");
  }
  const double floor = 1.0 / private_classes;
  if (!(rho >= floor && rho <= 1.0)) {
    throw ConfigError("rho must lie in [1/C, 1] = [" + std::to_string(floor) +
                      ", 1], got " + std::to_string(rho));
  }
  if (pattern_dim < 1 || color_dim < 1) {
    throw ConfigError("pattern_dim and color_dim must be >= 1");
  }
  if (!(pattern_signal >= 0.0) || !(color_signal >= 0.0) ||
      !(noise_sigma >= 0.0) || !std::isfinite(pattern_signal) ||
      !std::isfinite(color_signal) || !std::isfinite(noise_sigma)) {
    throw ConfigError("signals and noise_sigma must be finite and >= 0");
  }
}

double BiasConfig::MixtureWeight() const {
  const double floor = 1.0 / private_classes;
  return (rho - floor) / (1.0 - floor);
}

std::string_view SplitName(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "?";
}

Split ParseSplit(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "val") return Split::kVal;
  if (name == "test") return Split::kTest;
  throw IoError("unknown split '" + std::string(name) + "'");
}

LabeledSet LabeledSet::Rows(std::span<const std::size_t> indices) const {
  const std::size_t d = features.cols();
  LabeledSet out;
  out.features = Tensor({indices.size(), d});
  out.target_labels.reserve(indices.size());
  out.private_labels.reserve(indices.size());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const std::size_t src = indices[r];
    for (std::size_t c = 0; c < d; ++c) {
      out.features.at(r, c) = features.at(src, c);
    }
    out.target_labels.push_back(target_labels[src]);
    out.private_labels.push_back(private_labels[src]);
  }
  return out;
}

void BiasedDataset::Validate() const {
  const std::size_t n = size();
  if (private_labels.size() != n || splits.size() != n ||
      (n > 0 && features.rows() != n)) {
    throw ShapeError("dataset columns disagree in length");
  }
  for (std::size_t s = 0; s < n; ++s) {
    if (target_labels[s] < 0 || target_labels[s] >= target_classes ||
        private_labels[s] < 0 || private_labels[s] >= private_classes) {
      throw ConfigError("label out of range at sample " + std::to_string(s));
    }
  }
  if (!features.AllFinite()) throw NumericError("non-finite feature value");
}

LabeledSet BiasedDataset::Extract(Split split) const {
  std::vector<std::size_t> idx;
  for (std::size_t s = 0; s < size(); ++s) {
    if (splits[s] == split) idx.push_back(s);
  }
  LabeledSet all{features, target_labels, private_labels};
  return all.Rows(idx);
}

BiasedDataset Generate(const BiasConfig& config) {
  config.Validate();
  const auto k = static_cast<std::uint64_t>(config.target_classes);
  const auto c = static_cast<std::uint64_t>(config.private_classes);

  std::vector<std::vector<double>> patterns, colors;
  for (std::uint64_t i = 0; i < k; ++i) {
    patterns.push_back(
        UnitTemplate(config.seed, kPatternStreams + i, config.pattern_dim));
  }
  for (std::uint64_t i = 0; i < c; ++i) {
    colors.push_back(
        UnitTemplate(config.seed, kColorStreams + i, config.color_dim));
  }

  const std::size_t n = config.n_samples + config.n_val + config.n_test;
  const std::size_t d = config.feature_dim();
  BiasedDataset ds;
  ds.target_classes = config.target_classes;
  ds.private_classes = config.private_classes;
  ds.features = Tensor({n, d});
  ds.target_labels.resize(n);
  ds.private_labels.resize(n);
  ds.splits.resize(n);

  const double train_weight = config.MixtureWeight();
  for (std::size_t s = 0; s < n; ++s) {
    const Split split = s < config.n_samples ? Split::kTrain
                        : s < config.n_samples + config.n_val ? Split::kVal
                                                              : Split::kTest;
    const double weight = split == Split::kTest ? 0.0 : train_weight;
    SplitMix64 rng(config.seed, s);
    const auto y = rng.Below(k);
    const double u = rng.Uniform();
    const auto v = u < weight ? y % c : rng.Below(c);

    ds.splits[s] = split;
    ds.target_labels[s] = static_cast<int>(y);
    ds.private_labels[s] = static_cast<int>(v);
    double* row = &ds.features.data()[s * d];
    for (std::size_t j = 0; j < config.pattern_dim; ++j) {
      row[j] = patterns[y][j] * config.pattern_signal;
    }
    for (std::size_t j = 0; j < config.color_dim; ++j) {
      row[config.pattern_dim + j] = colors[v][j] * config.color_signal;
    }
    if (config.noise_sigma > 0.0) {
      for (std::size_t j = 0; j < d; ++j) {
        row[j] += config.noise_sigma * rng.Gaussian();
      }
    }
  }
  return ds;
}

Tensor ExactLabelJoint(const BiasConfig& config) {
  config.Validate();
  const auto k = static_cast<std::size_t>(config.target_classes);
  const auto c = static_cast<std::size_t>(config.private_classes);
  const double w = config.MixtureWeight();
  Tensor joint({k, c});
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      const double forced = (j == i % c) ? w : 0.0;
      joint.at(i, j) = (forced + (1.0 - w) / static_cast<double>(c)) /
                       static_cast<double>(k);
    }
  }
  return joint;
}

void WriteCsv(const BiasedDataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  const std::size_t d = dataset.features.cols();
  csv::Row header;
  for (std::size_t j = 0; j < d; ++j) header.push_back("f" + std::to_string(j));
  header.insert(header.end(), {"y", "v", "split"});
  csv::WriteRow(out, header);
  for (std::size_t s = 0; s < dataset.size(); ++s) {
    csv::Row row;
    row.reserve(d + 3);
    for (std::size_t j = 0; j < d; ++j) {
      row.push_back(csv::FormatDouble(dataset.features.at(s, j)));
    }
    row.push_back(std::to_string(dataset.target_labels[s]));
    row.push_back(std::to_string(dataset.private_labels[s]));
    row.push_back(std::string(SplitName(dataset.splits[s])));
    csv::WriteRow(out, row);
  }
  if (!out) throw IoError("write failed for " + path.string());
}

BiasedDataset ReadCsv(const std::filesystem::path& path, int target_classes,
                      int private_classes) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  const auto rows = csv::Parse(in);
  if (rows.empty() || rows[0].size() < 4) {
    throw IoError(path.string() + ": missing or short header");
  }
  const std::size_t d = rows[0].size() - 3;
  BiasedDataset ds;
  ds.target_classes = target_classes;
  ds.private_classes = private_classes;
  ds.features = Tensor({rows.size() - 1, d});
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const csv::Row& row = rows[r];
    if (row.size() != d + 3) {
      throw IoError(path.string() + ": row " + std::to_string(r) +
                    " has the wrong number of fields");
    }
    for (std::size_t j = 0; j < d; ++j) {
      ds.features.at(r - 1, j) = csv::ParseDouble(row[j]);
    }
    ds.target_labels.push_back(std::stoi(row[d]));
    ds.private_labels.push_back(std::stoi(row[d + 1]));
    ds.splits.push_back(ParseSplit(row[d + 2]));
  }
  ds.Validate();
  return ds;
}

}  // namespace irene::data
