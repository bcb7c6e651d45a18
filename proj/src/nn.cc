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

#include "irene/nn.h"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "irene/error.h"

namespace irene::nn {

void SgdConfig::Validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw ConfigError("momentum must lie in [0, 1)");
  }
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be >= 0");
  if (!(decay_factor > 0.0)) throw ConfigError("decay_factor must be > 0");
  for (std::size_t i = 1; i < milestones.size(); ++i) {
    if (milestones[i] <= milestones[i - 1]) {
      throw ConfigError("milestones must be strictly increasing");
    }
  }
}

double SgdConfig::LearningRateAt(int epoch) const {
  const auto passed = std::count_if(milestones.begin(), milestones.end(),
                                    [epoch](int m) { return m <= epoch; });
  return learning_rate * std::pow(decay_factor, static_cast<double>(passed));
}

std::size_t ParameterGroup::Add(std::string name, Tensor value) {
  for (const Parameter& p : params_) {
    if (p.name == name) {
      throw ConfigError("duplicate parameter '" + name + "' in group " + name_);
    }
  }
  Parameter p;
  p.name = std::move(name);
  p.grad = Tensor(value.shape());
  p.momentum = Tensor(value.shape());
  p.value = std::move(value);
  params_.push_back(std::move(p));
  return params_.size() - 1;
}

void ParameterGroup::LoadGradients(const ad::Graph& graph,
                                   std::span<const ad::NodeId> leaves) {
  if (leaves.size() != params_.size()) {
    throw StateError("group " + name_ + ": " + std::to_string(leaves.size()) +
                     " gradient leaves for " + std::to_string(params_.size()) +
                     " parameters");
  }
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const Tensor& g = graph.grad(leaves[i]);
    if (g.shape() != params_[i].value.shape()) {
      throw ShapeError("gradient shape mismatch for " + params_[i].name);
    }
    params_[i].grad = g;
    params_[i].has_grad = true;
  }
}

void ParameterGroup::ClearGradients() {
  for (Parameter& p : params_) {
    p.grad.Fill(0.0);
    p.has_grad = false;
  }
}

Tensor InitParameters(const Shape& shape, std::size_t fan_in,
                      SplitMix64& rng) {
  if (fan_in == 0) throw ConfigError("fan_in must be > 0");
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
  Tensor t(shape);
  for (double& v : t.values()) v = rng.Uniform(-bound, bound);
  return t;
}

void SgdStep(ParameterGroup& group, const SgdConfig& config, int epoch) {
  for (const Parameter& p : group.params()) {
    if (!p.has_grad) {
      throw StateError("sgd step on group " + group.name() +
                       ": missing gradient for " + p.name);
    }
  }
  const double lr = config.LearningRateAt(epoch);
  for (Parameter& p : group.params()) {
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i] + config.weight_decay * p.value[i];
      p.momentum[i] = config.momentum * p.momentum[i] + g;
      p.value[i] -= lr * p.momentum[i];
    }
    p.has_grad = false;
  }
}

Mlp Mlp::Create(std::string name, const std::vector<std::size_t>& widths,
                bool relu_on_output, SplitMix64& rng) {
  if (widths.size() < 2) throw ConfigError("mlp needs at least two widths");
  for (std::size_t w : widths) {
    if (w == 0) throw ConfigError("mlp widths must be positive");
  }
  Mlp mlp;
  mlp.widths_ = widths;
  mlp.group_ = ParameterGroup(std::move(name));
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    DenseLayer layer;
    layer.weight =
        mlp.group_.Add("w" + std::to_string(l),
                       InitParameters({widths[l], widths[l + 1]}, widths[l], rng));
    layer.bias = mlp.group_.Add("b" + std::to_string(l),
                                Tensor({widths[l + 1]}));
    layer.relu = (l + 2 < widths.size()) || relu_on_output;
    mlp.layers_.push_back(layer);
  }
  return mlp;
}

std::vector<ad::NodeId> Mlp::BindParameters(ad::Graph& graph) const {
  std::vector<ad::NodeId> leaves;
  leaves.reserve(group_.size());
  for (const Parameter& p : group_.params()) {
    leaves.push_back(graph.Leaf(p.value, group_.name() + "/" + p.name));
  }
  return leaves;
}

ad::NodeId Mlp::Apply(ad::Graph& graph, ad::NodeId x,
                      std::span<const ad::NodeId> leaves) const {
  if (leaves.size() != group_.size()) {
    throw StateError("mlp " + group_.name() + ": wrong number of bound leaves");
  }
  ad::NodeId h = x;
  for (const DenseLayer& layer : layers_) {
    h = graph.BiasAdd(graph.MatMul(h, leaves[layer.weight]),
                      leaves[layer.bias]);
    if (layer.relu) h = graph.Relu(h);
  }
  return h;
}

Tensor Mlp::Evaluate(const Tensor& x) const {
  if (x.rank() != 2 || x.cols() != input_width()) {
    throw ShapeError("mlp " + group_.name() + ": input " +
                     ShapeToString(x.shape()) + " for width " +
                     std::to_string(input_width()));
  }
  Tensor h = x;
  for (const DenseLayer& layer : layers_) {
    const Tensor& w = group_[layer.weight].value;
    const Tensor& b = group_[layer.bias].value;
    const std::size_t rows = h.rows(), in = w.rows(), out = w.cols();
    Tensor next({rows, out});
    for (std::size_t r = 0; r < rows; ++r) {
      double* orow = &next.data()[r * out];
      for (std::size_t t = 0; t < in; ++t) {
        const double hv = h.at(r, t);
        if (hv == 0.0) continue;
        const double* wrow = &w.data()[t * out];
        for (std::size_t c = 0; c < out; ++c) orow[c] += hv * wrow[c];
      }
      // Same summation order as the graph path (matmul, then bias).
      for (std::size_t c = 0; c < out; ++c) orow[c] += b[c];
      if (layer.relu) {
        for (std::size_t c = 0; c < out; ++c) orow[c] = std::max(orow[c], 0.0);
      }
    }
    h = std::move(next);
  }
  return h;
}

nlohmann::json ToJson(const ParameterGroup& group) {
  nlohmann::json params = nlohmann::json::array();
  for (const Parameter& p : group.params()) {
    params.push_back({{"name", p.name},
                      {"shape", p.value.shape()},
                      {"values", p.value.values()},
                      {"momentum", p.momentum.values()}});
  }
  return {{"name", group.name()}, {"params", std::move(params)}};
}

void FromJson(const nlohmann::json& j, ParameterGroup& group) {
  try {
    if (j.at("name").get<std::string>() != group.name()) {
      throw IoError("snapshot group '" + j.at("name").get<std::string>() +
                    "' does not match '" + group.name() + "'");
    }
    const auto& params = j.at("params");
    if (params.size() != group.size()) {
      throw IoError("snapshot of group " + group.name() +
                    " has a different parameter count");
    }
    for (std::size_t i = 0; i < group.size(); ++i) {
      Parameter& p = group[i];
      const auto& entry = params[i];
      if (entry.at("name").get<std::string>() != p.name ||
          entry.at("shape").get<Shape>() != p.value.shape()) {
        throw IoError("snapshot parameter mismatch at " + group.name() + "/" +
                      p.name);
      }
      p.value = Tensor(p.value.shape(), entry.at("values").get<std::vector<double>>());
      p.momentum =
          Tensor(p.value.shape(), entry.at("momentum").get<std::vector<double>>());
      p.grad.Fill(0.0);
      p.has_grad = false;
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed parameter snapshot: ") + e.what());
  }
}

}  // namespace irene::nn
