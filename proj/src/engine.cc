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

#include "irene/engine.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <string>

#include <nlohmann/json.hpp>

#include "irene/autodiff.h"
#include "irene/error.h"
#include "irene/info_metrics.h"
#include "irene/rng.h"

namespace irene::engine {

std::string_view ModeName(TrainingMode mode) {
  return mode == TrainingMode::kBaseline ? "baseline" : "irene";
}

TrainingMode ParseMode(std::string_view name) {
  if (name == "baseline") return TrainingMode::kBaseline;
  if (name == "irene") return TrainingMode::kIrene;
  throw ConfigError("unknown mode '" + std::string(name) +
                    "' (expected baseline or irene)");
}

void IreneConfig::Validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw ConfigError("alpha must be finite and >= 0");
  }
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw ConfigError("gamma must be finite and >= 0");
  }
  if (epochs <= 0) throw ConfigError("epochs must be > 0");
  if (batch_size == 0) throw ConfigError("batch_size must be > 0");
  sgd.Validate();
}

void Architecture::Validate() const {
  if (bottleneck == 0) throw ConfigError("bottleneck width must be > 0");
  for (std::size_t w : encoder_hidden) {
    if (w == 0) throw ConfigError("encoder hidden widths must be > 0");
  }
  for (std::size_t w : head_hidden) {
    if (w == 0) throw ConfigError("head hidden widths must be > 0");
  }
}

ModelTriple ModelTriple::Create(const Architecture& arch,
                                std::size_t input_width, int target_classes,
                                int private_classes, std::uint64_t seed) {
  arch.Validate();
  if (input_width == 0 || target_classes < 1 || private_classes < 1) {
    throw ConfigError("model needs positive input width and class counts");
  }
  std::vector<std::size_t> enc{input_width};
  enc.insert(enc.end(), arch.encoder_hidden.begin(), arch.encoder_hidden.end());
  enc.push_back(arch.bottleneck);

  auto head = [&](int classes) {
    std::vector<std::size_t> w{arch.bottleneck};
    w.insert(w.end(), arch.head_hidden.begin(), arch.head_hidden.end());
    w.push_back(static_cast<std::size_t>(classes));
    return w;
  };

  SplitMix64 enc_rng(seed, 0), g_rng(seed, 1), h_rng(seed, 2);
  ModelTriple m;
  m.encoder = nn::Mlp::Create("encoder", enc, arch.bottleneck_relu, enc_rng);
  m.target_head =
      nn::Mlp::Create("target_head", head(target_classes), false, g_rng);
  m.private_head =
      nn::Mlp::Create("private_head", head(private_classes), false, h_rng);
  return m;
}

void ModelTriple::Validate() const {
  if (target_head.input_width() != encoder.output_width() ||
      private_head.input_width() != encoder.output_width()) {
    throw ShapeError("heads must consume the encoder's bottleneck width");
  }
}

IterationLosses ComputeGradients(ModelTriple& model, const Batch& batch,
                                 const IreneConfig& config, TrainingMode mode,
                                 std::span<const double> label_prior) {
  model.Validate();
  if (batch.y.size() != batch.x.rows() || batch.v.size() != batch.x.rows()) {
    throw ShapeError("batch labels do not match the number of rows");
  }
  const bool irene = mode == TrainingMode::kIrene;
  const double target_weight = irene ? config.alpha : 1.0;
  const double removal_weight = irene ? config.gamma : 0.0;

  ad::Graph graph;
  const ad::NodeId x = graph.Leaf(batch.x, "x");
  const auto f_leaves = model.encoder.BindParameters(graph);
  const auto g_leaves = model.target_head.BindParameters(graph);
  const auto h_leaves = model.private_head.BindParameters(graph);

  const ad::NodeId z = model.encoder.Apply(graph, x, f_leaves);
  const ad::NodeId y = model.target_head.Apply(graph, z, g_leaves);
  // Two H paths over the same leaves: the CE stream sees z blocked, the MI
  // stream sees z itself.
  const ad::NodeId v_blocked =
      model.private_head.Apply(graph, graph.StopGradient(z), h_leaves);
  const ad::NodeId v = model.private_head.Apply(graph, z, h_leaves);

  const ad::NodeId target_ce = info::CrossEntropy(graph, y, batch.y);
  const ad::NodeId private_ce = info::CrossEntropy(graph, v_blocked, batch.v);

  const std::size_t n_private = model.private_head.output_width();
  const ad::NodeId soft = graph.Softmax(v);
  const info::JointNodes joint =
      config.marginal == MarginalSource::kDatasetPrior
          ? info::JointFromBatchWithPrior(graph, soft, batch.v, label_prior)
          : info::JointFromBatch(graph, soft, batch.v, n_private);
  const ad::NodeId mi = info::MiProxy(graph, joint);

  const ad::NodeId target_stream = graph.Scale(target_ce, target_weight);
  const ad::NodeId encoder_stream =
      graph.Add(target_stream, graph.Scale(mi, removal_weight));

  IterationLosses losses{graph.value(target_ce).item(),
                         graph.value(private_ce).item(),
                         graph.value(mi).item()};
  if (!std::isfinite(losses.target_ce) || !std::isfinite(losses.private_ce) ||
      !std::isfinite(losses.mi_proxy)) {
    throw NumericError("non-finite loss (target " +
                       std::to_string(losses.target_ce) + ", private " +
                       std::to_string(losses.private_ce) + ", mi " +
                       std::to_string(losses.mi_proxy) + ")");
  }

  graph.Backward(target_stream);
  model.target_head.group().LoadGradients(graph, g_leaves);

  graph.Backward(private_ce);
  model.private_head.group().LoadGradients(graph, h_leaves);

  // The theta_H slots of this pass hold the MI contribution; they are never
  // loaded.
  graph.Backward(encoder_stream);
  model.encoder.group().LoadGradients(graph, f_leaves);

  return losses;
}

void ApplyUpdates(ModelTriple& model, const nn::SgdConfig& sgd, int epoch) {
  nn::SgdStep(model.encoder.group(), sgd, epoch);
  nn::SgdStep(model.target_head.group(), sgd, epoch);
  nn::SgdStep(model.private_head.group(), sgd, epoch);
}

IterationLosses IreneIteration(ModelTriple& model, const Batch& batch,
                               const IreneConfig& config, int epoch,
                               std::span<const double> label_prior) {
  const IterationLosses losses = ComputeGradients(
      model, batch, config, TrainingMode::kIrene, label_prior);
  ApplyUpdates(model, config.sgd, epoch);
  return losses;
}

IterationLosses BaselineIteration(ModelTriple& model, const Batch& batch,
                                  const IreneConfig& config, int epoch) {
  const IterationLosses losses =
      ComputeGradients(model, batch, config, TrainingMode::kBaseline);
  ApplyUpdates(model, config.sgd, epoch);
  return losses;
}

TrainTrace Train(ModelTriple& model, const data::LabeledSet& train,
                 int private_classes, const IreneConfig& config,
                 const TrainOptions& options) {
  config.Validate();
  if (train.size() == 0) throw ConfigError("training set is empty");
  const int stop = options.stop_epoch.value_or(config.epochs);
  if (options.start_epoch < 0 || stop > config.epochs ||
      options.start_epoch > stop) {
    throw ConfigError("invalid epoch range");
  }

  std::vector<double> prior;
  if (config.marginal == MarginalSource::kDatasetPrior) {
    prior.assign(static_cast<std::size_t>(private_classes), 0.0);
    for (int v : train.private_labels) prior.at(static_cast<std::size_t>(v)) += 1.0;
    for (double& p : prior) p /= static_cast<double>(train.size());
  }

  const std::size_t n = train.size();
  const std::size_t d = train.features.cols();
  TrainTrace trace;
  std::vector<std::size_t> order(n);
  for (int epoch = options.start_epoch; epoch < stop; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    SplitMix64 rng(options.shuffle_seed, static_cast<std::uint64_t>(epoch));
    std::shuffle(order.begin(), order.end(), rng);

    EpochRecord rec;
    rec.epoch = epoch;
    rec.learning_rate = config.sgd.LearningRateAt(epoch);
    std::size_t iterations = 0;
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t len = std::min(config.batch_size, n - start);
      Batch batch;
      batch.x = Tensor({len, d});
      for (std::size_t r = 0; r < len; ++r) {
        const std::size_t src = order[start + r];
        std::copy_n(&train.features.data()[src * d], d,
                    &batch.x.data()[r * d]);
        batch.y.push_back(train.target_labels[src]);
        batch.v.push_back(train.private_labels[src]);
      }
      const IterationLosses losses =
          ComputeGradients(model, batch, config, options.mode, prior);
      ApplyUpdates(model, config.sgd, epoch);
      rec.target_loss += losses.target_ce;
      rec.private_ce += losses.private_ce;
      rec.mi_proxy += losses.mi_proxy;
      ++iterations;
    }
    const double count = static_cast<double>(iterations);
    rec.target_loss /= count;
    rec.private_ce /= count;
    rec.mi_proxy /= count;
    trace.push_back(rec);
  }
  return trace;
}

void SaveCheckpoint(const ModelTriple& model, int next_epoch,
                    const std::filesystem::path& path) {
  const nlohmann::json j = {{"next_epoch", next_epoch},
                            {"encoder", nn::ToJson(model.encoder.group())},
                            {"target_head", nn::ToJson(model.target_head.group())},
                            {"private_head",
                             nn::ToJson(model.private_head.group())}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  out << j.dump() << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

int LoadCheckpoint(ModelTriple& model, const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read checkpoint " + path.string());
  try {
    const nlohmann::json j = nlohmann::json::parse(in);
    nn::FromJson(j.at("encoder"), model.encoder.group());
    nn::FromJson(j.at("target_head"), model.target_head.group());
    nn::FromJson(j.at("private_head"), model.private_head.group());
    return j.at("next_epoch").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed checkpoint " + path.string() + ": " + e.what());
  }
}

}  // namespace irene::engine
