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

#ifndef IRENE_DATAGEN_H_
#define IRENE_DATAGEN_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "irene/tensor.h"

namespace irene::data {

// Synthetic benchmark: each sample concatenates a class "pattern" block and
// an attribute "color" block. With probability rho the attribute equals
// (class mod C); rho = 1/C makes the two independent.
struct BiasConfig {
  std::size_t n_samples = 10000;  // train split
  std::size_t n_val = 0;          // held out, same rho as train
  std::size_t n_test = 2000;      // always rho = 1/C
  int target_classes = 10;        // K
  int private_classes = 10;       // C
  double rho = 0.99;
  std::size_t pattern_dim = 32;
  std::size_t color_dim = 8;
  double pattern_signal = 3.0;
  double color_signal = 6.0;  // 2:1, the easier cue
  double noise_sigma = 1.0;
  std::uint64_t seed = 0;

  void Validate() const;
  std::size_t feature_dim() const { return pattern_dim + color_dim; }
  // Probability of forcing v = y mod C; the rest is uniform over C.
  double MixtureWeight() const;
};

enum class Split : std::uint8_t { kTrain = 0, kVal = 1, kTest = 2 };

std::string_view SplitName(Split split);
Split ParseSplit(std::string_view name);

// Materialized subset (one split).
struct LabeledSet {
  Tensor features;  // [N x D]
  std::vector<int> target_labels;
  std::vector<int> private_labels;

  std::size_t size() const { return target_labels.size(); }
  LabeledSet Rows(std::span<const std::size_t> indices) const;
};

struct BiasedDataset {
  Tensor features;  // [N x D]
  std::vector<int> target_labels;
  std::vector<int> private_labels;
  std::vector<Split> splits;
  int target_classes = 0;
  int private_classes = 0;

  std::size_t size() const { return target_labels.size(); }
  void Validate() const;
  LabeledSet Extract(Split split) const;
};

// Deterministic in config.seed; sample s draws from RNG stream s, so the
// generation is byte-identical regardless of evaluation order.
BiasedDataset Generate(const BiasConfig& config);

// Exact [K x C] joint of (target, private) labels under the sampling law of
// Generate() at the configured rho.
Tensor ExactLabelJoint(const BiasConfig& config);

// CSV with header f0..f{D-1},y,v,split.
void WriteCsv(const BiasedDataset& dataset, const std::filesystem::path& path);
BiasedDataset ReadCsv(const std::filesystem::path& path, int target_classes,
                      int private_classes);

}  // namespace irene::data

#endif  // IRENE_DATAGEN_H_
