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

#ifndef IRENE_ENGINE_H_
#define IRENE_ENGINE_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "irene/datagen.h"
#include "irene/nn.h"
#include "irene/tensor.h"

namespace irene::engine {

enum class TrainingMode { kBaseline, kIrene };

std::string_view ModeName(TrainingMode mode);
TrainingMode ParseMode(std::string_view name);

// Which column marginal the MI proxy uses for the private labels.
enum class MarginalSource { kBatch, kDatasetPrior };

struct IreneConfig {
  double alpha = 0.5;  // weight of the target loss
  double gamma = 0.5;  // weight of the MI removal term
  nn::SgdConfig sgd;
  int epochs = 30;
  std::size_t batch_size = 100;
  MarginalSource marginal = MarginalSource::kBatch;

  void Validate() const;
};

struct Architecture {
  std::vector<std::size_t> encoder_hidden{64};
  std::size_t bottleneck = 32;
  bool bottleneck_relu = true;
  std::vector<std::size_t> head_hidden;  // empty: heads are single layers

  void Validate() const;
};

// Encoder F, target head G and private head H. G and H both read the
// bottleneck z = F(x).
struct ModelTriple {
  nn::Mlp encoder;
  nn::Mlp target_head;
  nn::Mlp private_head;

  static ModelTriple Create(const Architecture& arch, std::size_t input_width,
                            int target_classes, int private_classes,
                            std::uint64_t seed);
  void Validate() const;
};

struct Batch {
  Tensor x;  // [B x D]
  std::vector<int> y;
  std::vector<int> v;
};

struct IterationLosses {
  double target_ce = 0.0;
  double private_ce = 0.0;
  double mi_proxy = 0.0;
};

// Computes the per-group gradients of one iteration from a single forward
// pass and stores them in the groups' gradient buffers:
//   G <- d(a * CE(y, y_true)) / d(theta_G)
//   H <- d(CE(v, v_true)) / d(theta_H), with z blocked at H's input
//   F <- d(a * CE(y, y_true) + g * MI(v, v_true)) / d(theta_F)
// The MI stream runs through H but its theta_H gradient is discarded.
// Baseline mode uses a = 1, g = 0 for the G and F streams.
// `label_prior` is required when config.marginal == kDatasetPrior.
IterationLosses ComputeGradients(ModelTriple& model, const Batch& batch,
                                 const IreneConfig& config, TrainingMode mode,
                                 std::span<const double> label_prior = {});

// One sgd step per group at the learning rate of `epoch`.
void ApplyUpdates(ModelTriple& model, const nn::SgdConfig& sgd, int epoch);

IterationLosses IreneIteration(ModelTriple& model, const Batch& batch,
                               const IreneConfig& config, int epoch,
                               std::span<const double> label_prior = {});
IterationLosses BaselineIteration(ModelTriple& model, const Batch& batch,
                                  const IreneConfig& config, int epoch);

struct EpochRecord {
  int epoch = 0;
  double target_loss = 0.0;  // unweighted CE, mean over iterations
  double private_ce = 0.0;
  double mi_proxy = 0.0;
  double learning_rate = 0.0;
};

using TrainTrace = std::vector<EpochRecord>;

struct TrainOptions {
  TrainingMode mode = TrainingMode::kIrene;
  std::uint64_t shuffle_seed = 0;
  int start_epoch = 0;  // resume point; the permutation of epoch e depends
                        // only on (shuffle_seed, e)
  std::optional<int> stop_epoch;  // exclusive; defaults to config.epochs
};

// Runs epochs [start_epoch, stop_epoch) on `train`. Every epoch visits all
// samples in a seeded permutation; the last partial batch is kept.
TrainTrace Train(ModelTriple& model, const data::LabeledSet& train,
                 int private_classes, const IreneConfig& config,
                 const TrainOptions& options);

// Checkpoint = parameters, momentum buffers and the next epoch to run.
void SaveCheckpoint(const ModelTriple& model, int next_epoch,
                    const std::filesystem::path& path);
// Restores into a model of the same architecture; returns the next epoch.
int LoadCheckpoint(ModelTriple& model, const std::filesystem::path& path);

}  // namespace irene::engine

#endif  // IRENE_ENGINE_H_
