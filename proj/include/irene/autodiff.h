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

#ifndef IRENE_AUTODIFF_H_
#define IRENE_AUTODIFF_H_

#include <compare>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "irene/tensor.h"

namespace irene::ad {

// Index of a node inside one Graph. Only meaningful for the graph that
// created it.
struct NodeId {
  std::size_t index = 0;
  friend auto operator<=>(NodeId, NodeId) = default;
};

enum class OpKind {
  kLeaf,
  kMatMul,         // [m x k] . [k x n]
  kBiasAdd,        // [m x n] + [n], broadcast over rows
  kAdd,
  kSub,
  kMul,            // elementwise
  kScale,          // x * scalar
  kRelu,           // subgradient 0 at 0
  kSoftmax,        // row-wise
  kLogSoftmax,     // row-wise, numerically stable
  kLog,            // entries below `scalar` (when > 0) map to 0 with 0 grad
  kExp,
  kSum,            // all elements -> scalar
  kMean,           // all elements -> scalar
  kSelect,         // out[b] = x[b, labels[b]]
  kOneHotContract, // out[i, j] = sum_b x[b, i] * [labels[b] == j]
  kStopGradient,
};

std::string_view OpName(OpKind op);

struct Node {
  OpKind op = OpKind::kLeaf;
  std::vector<NodeId> inputs;
  std::string name;            // leaves only
  double scalar = 0.0;         // kScale factor, kLog floor
  std::vector<int> labels;     // kSelect, kOneHotContract
  std::size_t classes = 0;     // kOneHotContract
  Tensor value;
  Tensor grad;
};

enum class Accumulate { kReset, kSum };

// Reverse-mode tape over dense tensors.
//
// Operations evaluate eagerly when recorded, so the graph is forward-complete
// right after construction. Rebinding a leaf with Bind() invalidates cached
// values until Forward() runs again; Backward() on a stale graph throws.
//
// Every node owns a gradient slot of its value's shape. Backward(seed,
// kReset) zeroes all slots first; kSum adds into the existing slots.
class Graph {
 public:
  Graph() = default;

  // Leaf with an optional name (used by Bind/Forward). Unnamed leaves get a
  // generated name "%<index>".
  NodeId Leaf(Tensor value, std::string name = {});

  NodeId MatMul(NodeId a, NodeId b);
  NodeId BiasAdd(NodeId x, NodeId bias);
  NodeId Add(NodeId a, NodeId b);
  NodeId Sub(NodeId a, NodeId b);
  NodeId Mul(NodeId a, NodeId b);
  NodeId Scale(NodeId x, double factor);
  NodeId Relu(NodeId x);
  NodeId Softmax(NodeId x);
  NodeId LogSoftmax(NodeId x);
  NodeId Log(NodeId x, double floor = 0.0);
  NodeId Exp(NodeId x);
  NodeId Sum(NodeId x);
  NodeId Mean(NodeId x);
  NodeId Select(NodeId x, std::span<const int> labels);
  NodeId OneHotContract(NodeId x, std::span<const int> labels,
                        std::size_t classes);
  NodeId StopGradient(NodeId x);

  const Tensor& value(NodeId id) const { return node(id).value; }
  const Tensor& grad(NodeId id) const { return node(id).grad; }
  const Node& node(NodeId id) const;
  std::size_t size() const { return nodes_.size(); }
  std::span<const Node> nodes() const { return nodes_; }

  // Leaf lookup by name; throws StateError if absent.
  NodeId FindLeaf(std::string_view name) const;

  // Replaces a leaf's value (same shape required) and marks the graph stale.
  void Bind(NodeId leaf, Tensor value);
  void Bind(std::string_view name, Tensor value);

  // Re-evaluates every node in order. Returns the value of the last node.
  const Tensor& Forward();
  const Tensor& Forward(const std::map<std::string, Tensor>& inputs);
  bool stale() const { return stale_; }

  void Backward(NodeId seed, Accumulate mode = Accumulate::kReset);
  void ZeroGrad();

 private:
  Node& mutable_node(NodeId id);
  NodeId Record(Node node);
  void Evaluate(Node& node) const;
  void Propagate(const Node& node);

  std::vector<Node> nodes_;
  bool stale_ = false;
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
  // Elements skipped because a central difference straddled a relu kink.
  std::size_t excluded = 0;
  bool passed = false;
};

// Compares d(seed)/d(leaf) against central differences, element by element:
// error = |analytic - numeric| / max(1, |analytic|). An element is excluded
// when the +step and -step evaluations put any relu input on different sides
// of zero. The graph is restored (values and leaf) on return; its gradient
// slots hold the analytic gradient of `seed`.
GradCheckResult CheckGradients(Graph& graph, NodeId seed, NodeId leaf,
                               double step, double tolerance);

}  // namespace irene::ad

#endif  // IRENE_AUTODIFF_H_
