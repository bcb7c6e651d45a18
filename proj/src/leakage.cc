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

#include "irene/leakage.h"

#include <algorithm>
#include <numeric>

#include "irene/autodiff.h"
#include "irene/error.h"
#include "irene/info_metrics.h"
#include "irene/rng.h"

namespace irene::eval {

double Accuracy(const Tensor& logits, std::span<const int> labels) {
  if (labels.empty()) throw ConfigError("accuracy of an empty batch");
  if (logits.rank() != 2 || logits.rows() != labels.size()) {
    throw ShapeError("accuracy: logits " + ShapeToString(logits.shape()) +
                     " for " + std::to_string(labels.size()) + " labels");
  }
  const std::size_t cols = logits.cols();
  std::size_t hits = 0;
  for (std::size_t r = 0; r < labels.size(); ++r) {
    if (labels[r] < 0 || static_cast<std::size_t>(labels[r]) >= cols) {
      throw ConfigError("accuracy: label out of range at row " +
                        std::to_string(r));
    }
    const double* row = &logits.data()[r * cols];
    // max_element returns the first maximum.
    const auto best = static_cast<std::size_t>(
        std::max_element(row, row + cols) - row);
    if (best == static_cast<std::size_t>(labels[r])) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

void ProbeConfig::Validate() const {
  if (epochs <= 0) throw ConfigError("probe epochs must be > 0");
  if (batch_size == 0) throw ConfigError("probe batch_size must be > 0");
  sgd.Validate();
}

nn::Mlp TrainProbe(const nn::Mlp& encoder, const data::LabeledSet& train,
                   int private_classes, const ProbeConfig& config,
                   std::uint64_t seed) {
  config.Validate();
  if (train.size() == 0) throw ConfigError("probe training set is empty");
  const Tensor z = encoder.Evaluate(train.features);
  const std::size_t width = z.cols();

  std::vector<std::size_t> widths{width};
  widths.insert(widths.end(), config.hidden.begin(), config.hidden.end());
  widths.push_back(static_cast<std::size_t>(private_classes));
  SplitMix64 init_rng(seed, 0);
  nn::Mlp probe = nn::Mlp::Create("probe", widths, false, init_rng);

  const std::size_t n = train.size();
  std::vector<std::size_t> order(n);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    SplitMix64 shuffle_rng(seed, 1 + static_cast<std::uint64_t>(epoch));
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t len = std::min(config.batch_size, n - start);
      Tensor zb({len, width});
      std::vector<int> labels;
      labels.reserve(len);
      for (std::size_t r = 0; r < len; ++r) {
        const std::size_t src = order[start + r];
        std::copy_n(&z.data()[src * width], width, &zb.data()[r * width]);
        labels.push_back(train.private_labels[src]);
      }
      ad::Graph graph;
      const ad::NodeId input = graph.Leaf(std::move(zb), "z");
      const auto leaves = probe.BindParameters(graph);
      const ad::NodeId logits = probe.Apply(graph, input, leaves);
      const ad::NodeId loss = info::CrossEntropy(graph, logits, labels);
      graph.Backward(loss);
      probe.group().LoadGradients(graph, leaves);
      nn::SgdStep(probe.group(), config.sgd, epoch);
    }
  }
  return probe;
}

EvalResult Evaluate(const engine::ModelTriple& model,
                    const data::LabeledSet& test, const nn::Mlp& probe,
                    int private_classes) {
  if (test.size() == 0) throw ConfigError("evaluation split is empty");
  const Tensor z = model.encoder.Evaluate(test.features);
  const Tensor y = model.target_head.Evaluate(z);
  const Tensor v = model.private_head.Evaluate(z);
  const Tensor p = probe.Evaluate(z);

  ad::Graph graph;
  const ad::NodeId soft = graph.Softmax(graph.Leaf(v));

  EvalResult r;
  r.target_accuracy = Accuracy(y, test.target_labels);
  r.leakage_accuracy_cotrained = Accuracy(v, test.private_labels);
  r.leakage_accuracy_probe = Accuracy(p, test.private_labels);
  r.chance_level = 1.0 / static_cast<double>(private_classes);
  r.mi_proxy_final = info::MiProxyValue(
      graph.value(soft), test.private_labels,
      static_cast<std::size_t>(private_classes));
  r.n_eval = test.size();
  return r;
}

}  // namespace irene::eval
