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

#ifndef IRENE_LEAKAGE_H_
#define IRENE_LEAKAGE_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "irene/datagen.h"
#include "irene/engine.h"
#include "irene/nn.h"
#include "irene/tensor.h"

namespace irene::eval {

// Fraction of rows whose argmax (lowest index on ties) equals the label.
double Accuracy(const Tensor& logits, std::span<const int> labels);

struct ProbeConfig {
  int epochs = 40;
  std::size_t batch_size = 100;
  nn::SgdConfig sgd{0.1, 0.9, 1e-4, {20, 30}, 0.1};
  std::vector<std::size_t> hidden;  // empty: one dense layer, like H

  void Validate() const;
};

// Fits a fresh head on (z, v) pairs where z = encoder(train.features). The
// encoder is only evaluated, never differentiated.
nn::Mlp TrainProbe(const nn::Mlp& encoder, const data::LabeledSet& train,
                   int private_classes, const ProbeConfig& config,
                   std::uint64_t seed);

struct EvalResult {
  double target_accuracy = 0.0;
  double leakage_accuracy_cotrained = 0.0;
  double leakage_accuracy_probe = 0.0;
  double chance_level = 0.0;  // 1/C
  double mi_proxy_final = 0.0;
  std::size_t n_eval = 0;
};

// All metrics on `test`; mi_proxy_final uses one joint over the whole split.
EvalResult Evaluate(const engine::ModelTriple& model,
                    const data::LabeledSet& test, const nn::Mlp& probe,
                    int private_classes);

}  // namespace irene::eval

#endif  // IRENE_LEAKAGE_H_
