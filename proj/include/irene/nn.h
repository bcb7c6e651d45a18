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

#ifndef IRENE_NN_H_
#define IRENE_NN_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "irene/autodiff.h"
#include "irene/rng.h"
#include "irene/tensor.h"

namespace irene::nn {

struct SgdConfig {
  double learning_rate = 0.1;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  std::vector<int> milestones;
  double decay_factor = 0.1;

  void Validate() const;
  // learning_rate * decay_factor^(number of milestones <= epoch).
  double LearningRateAt(int epoch) const;
};

struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
  Tensor momentum;
  bool has_grad = false;
};

// Named parameters of one sub-network, each with gradient and momentum
// buffers of its own shape.
class ParameterGroup {
 public:
  ParameterGroup() = default;
  explicit ParameterGroup(std::string name) : name_(std::move(name)) {}

  const std::string& name() const { return name_; }
  std::size_t Add(std::string name, Tensor value);

  std::span<Parameter> params() { return params_; }
  std::span<const Parameter> params() const { return params_; }
  Parameter& operator[](std::size_t i) { return params_[i]; }
  const Parameter& operator[](std::size_t i) const { return params_[i]; }
  std::size_t size() const { return params_.size(); }

  // Copies the gradient slots of `leaves` (one per parameter, in order).
  void LoadGradients(const ad::Graph& graph, std::span<const ad::NodeId> leaves);
  void ClearGradients();

 private:
  std::string name_;
  std::vector<Parameter> params_;
};

// Uniform(-sqrt(6/fan_in), +sqrt(6/fan_in)).
Tensor InitParameters(const Shape& shape, std::size_t fan_in, SplitMix64& rng);

// buf <- momentum*buf + (grad + weight_decay*param); param <- param - lr*buf,
// with lr = config.LearningRateAt(epoch). Consumes the gradients.
void SgdStep(ParameterGroup& group, const SgdConfig& config, int epoch);

struct DenseLayer {
  std::size_t weight = 0;  // index into the owning group, [in x out]
  std::size_t bias = 0;    // [out]
  bool relu = false;
};

// Chain of dense layers; relu after every layer except (optionally) the last.
class Mlp {
 public:
  Mlp() = default;

  // widths = {in, h1, ..., out}. Weights He-uniform, biases zero.
  static Mlp Create(std::string name, const std::vector<std::size_t>& widths,
                    bool relu_on_output, SplitMix64& rng);

  std::size_t input_width() const { return widths_.front(); }
  std::size_t output_width() const { return widths_.back(); }
  const std::vector<std::size_t>& widths() const { return widths_; }
  std::span<const DenseLayer> layers() const { return layers_; }

  ParameterGroup& group() { return group_; }
  const ParameterGroup& group() const { return group_; }

  // Registers one leaf per parameter, named "<group>/<param>".
  std::vector<ad::NodeId> BindParameters(ad::Graph& graph) const;

  // Records the forward pass on `graph` using previously bound leaves. The
  // same leaves may be applied to several inputs (shared weights).
  ad::NodeId Apply(ad::Graph& graph, ad::NodeId x,
                   std::span<const ad::NodeId> leaves) const;

  // Plain evaluation without gradient bookkeeping.
  Tensor Evaluate(const Tensor& x) const;

 private:
  std::vector<std::size_t> widths_;
  std::vector<DenseLayer> layers_;
  ParameterGroup group_;
};

// Snapshot: {"name", "params": [{"name","shape","values","momentum"}]}.
nlohmann::json ToJson(const ParameterGroup& group);
// Restores values and momentum into a group with matching names and shapes.
void FromJson(const nlohmann::json& j, ParameterGroup& group);

}  // namespace irene::nn

#endif  // IRENE_NN_H_
