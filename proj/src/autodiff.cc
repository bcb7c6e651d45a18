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

#include "irene/autodiff.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "irene/error.h"

namespace irene::ad {
namespace {

void RequireSameShape(const Tensor& a, const Tensor& b, std::string_view op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape " + ShapeToString(a.shape()) +
                     " vs " + ShapeToString(b.shape()));
  }
}

void RequireRank2(const Tensor& t, std::string_view op) {
  if (t.rank() != 2) {
    throw ShapeError(std::string(op) + ": expected rank-2 input, got " +
                     ShapeToString(t.shape()));
  }
}

void AddInto(Tensor& dst, const Tensor& src) {
  auto d = dst.data();
  auto s = src.data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += s[i];
}

}  // namespace

std::string_view OpName(OpKind op) {
  switch (op) {
    case OpKind::kLeaf: return "leaf";
    case OpKind::kMatMul: return "matmul";
    case OpKind::kBiasAdd: return "bias_add";
    case OpKind::kAdd: return "add";
    case OpKind::kSub: return "sub";
    case OpKind::kMul: return "mul";
    case OpKind::kScale: return "scale";
    case OpKind::kRelu: return "relu";
    case OpKind::kSoftmax: return "softmax";
    case OpKind::kLogSoftmax: return "log_softmax";
    case OpKind::kLog: return "log";
    case OpKind::kExp: return "exp";
    case OpKind::kSum: return "sum";
    case OpKind::kMean: return "mean";
    case OpKind::kSelect: return "select";
    case OpKind::kOneHotContract: return "one_hot_contract";
    case OpKind::kStopGradient: return "stop_gradient";
  }
  return "unknown";
}

const Node& Graph::node(NodeId id) const {
  if (id.index >= nodes_.size()) {
    throw StateError("node id " + std::to_string(id.index) +
                     " out of range");
  }
  return nodes_[id.index];
}

Node& Graph::mutable_node(NodeId id) {
  return const_cast<Node&>(std::as_const(*this).node(id));
}

NodeId Graph::Record(Node n) {
  if (stale_) {
    throw StateError("cannot record an op on a stale graph; call Forward()");
  }
  for (NodeId in : n.inputs) node(in);  // range check
  Evaluate(n);
  n.grad = Tensor(n.value.shape());
  nodes_.push_back(std::move(n));
  return NodeId{nodes_.size() - 1};
}

NodeId Graph::Leaf(Tensor value, std::string name) {
  Node n;
  n.op = OpKind::kLeaf;
  n.name = name.empty() ? "%" + std::to_string(nodes_.size()) : std::move(name);
  for (const Node& other : nodes_) {
    if (other.op == OpKind::kLeaf && other.name == n.name) {
      throw StateError("duplicate leaf name '" + n.name + "'");
    }
  }
  n.value = std::move(value);
  if (!n.value.AllFinite()) {
    throw NumericError("leaf '" + n.name + "' holds a non-finite value");
  }
  n.grad = Tensor(n.value.shape());
  nodes_.push_back(std::move(n));
  return NodeId{nodes_.size() - 1};
}

namespace {
Node Unary(OpKind op, NodeId x) {
  Node n;
  n.op = op;
  n.inputs = {x};
  return n;
}
Node Binary(OpKind op, NodeId a, NodeId b) {
  Node n;
  n.op = op;
  n.inputs = {a, b};
  return n;
}
}  // namespace

NodeId Graph::MatMul(NodeId a, NodeId b) {
  return Record(Binary(OpKind::kMatMul, a, b));
}
NodeId Graph::BiasAdd(NodeId x, NodeId bias) {
  return Record(Binary(OpKind::kBiasAdd, x, bias));
}
NodeId Graph::Add(NodeId a, NodeId b) {
  return Record(Binary(OpKind::kAdd, a, b));
}
NodeId Graph::Sub(NodeId a, NodeId b) {
  return Record(Binary(OpKind::kSub, a, b));
}
NodeId Graph::Mul(NodeId a, NodeId b) {
  return Record(Binary(OpKind::kMul, a, b));
}
NodeId Graph::Scale(NodeId x, double factor) {
  Node n = Unary(OpKind::kScale, x);
  n.scalar = factor;
  return Record(std::move(n));
}
NodeId Graph::Relu(NodeId x) { return Record(Unary(OpKind::kRelu, x)); }
NodeId Graph::Softmax(NodeId x) { return Record(Unary(OpKind::kSoftmax, x)); }
NodeId Graph::LogSoftmax(NodeId x) {
  return Record(Unary(OpKind::kLogSoftmax, x));
}
NodeId Graph::Log(NodeId x, double floor) {
  if (!(floor >= 0.0)) throw ConfigError("log floor must be >= 0");
  Node n = Unary(OpKind::kLog, x);
  n.scalar = floor;
  return Record(std::move(n));
}
NodeId Graph::Exp(NodeId x) { return Record(Unary(OpKind::kExp, x)); }
NodeId Graph::Sum(NodeId x) { return Record(Unary(OpKind::kSum, x)); }
NodeId Graph::Mean(NodeId x) { return Record(Unary(OpKind::kMean, x)); }
NodeId Graph::Select(NodeId x, std::span<const int> labels) {
  Node n = Unary(OpKind::kSelect, x);
  n.labels.assign(labels.begin(), labels.end());
  return Record(std::move(n));
}
NodeId Graph::OneHotContract(NodeId x, std::span<const int> labels,
                             std::size_t classes) {
  Node n = Unary(OpKind::kOneHotContract, x);
  n.labels.assign(labels.begin(), labels.end());
  n.classes = classes;
  return Record(std::move(n));
}
NodeId Graph::StopGradient(NodeId x) {
  return Record(Unary(OpKind::kStopGradient, x));
}

NodeId Graph::FindLeaf(std::string_view name) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].op == OpKind::kLeaf && nodes_[i].name == name) {
      return NodeId{i};
    }
  }
  throw StateError("no leaf named '" + std::string(name) + "'");
}

void Graph::Bind(NodeId leaf, Tensor value) {
  Node& n = mutable_node(leaf);
  if (n.op != OpKind::kLeaf) throw StateError("Bind() target is not a leaf");
  RequireSameShape(n.value, value, "bind");
  if (!value.AllFinite()) {
    throw NumericError("leaf '" + n.name + "' bound to a non-finite value");
  }
  n.value = std::move(value);
  stale_ = true;
}

void Graph::Bind(std::string_view name, Tensor value) {
  Bind(FindLeaf(name), std::move(value));
}

const Tensor& Graph::Forward() {
  if (nodes_.empty()) throw StateError("Forward() on an empty graph");
  for (Node& n : nodes_) {
    if (n.op != OpKind::kLeaf) Evaluate(n);
  }
  stale_ = false;
  return nodes_.back().value;
}

const Tensor& Graph::Forward(const std::map<std::string, Tensor>& inputs) {
  for (const auto& [name, value] : inputs) Bind(name, value);
  return Forward();
}

void Graph::Evaluate(Node& n) const {
  auto in = [&](std::size_t k) -> const Tensor& {
    return nodes_[n.inputs[k].index].value;
  };
  const std::string_view op = OpName(n.op);

  switch (n.op) {
    case OpKind::kLeaf:
      return;
    case OpKind::kMatMul: {
      const Tensor& a = in(0);
      const Tensor& b = in(1);
      RequireRank2(a, op);
      RequireRank2(b, op);
      const std::size_t m = a.rows(), k = a.cols(), p = b.cols();
      if (b.rows() != k) {
        throw ShapeError("matmul: " + ShapeToString(a.shape()) + " . " +
                         ShapeToString(b.shape()));
      }
      Tensor out({m, p});
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t t = 0; t < k; ++t) {
          const double av = a.at(i, t);
          if (av == 0.0) continue;
          const double* brow = &b.data()[t * p];
          double* orow = &out.data()[i * p];
          for (std::size_t j = 0; j < p; ++j) orow[j] += av * brow[j];
        }
      }
      n.value = std::move(out);
      break;
    }
    case OpKind::kBiasAdd: {
      const Tensor& x = in(0);
      const Tensor& b = in(1);
      RequireRank2(x, op);
      if (b.size() != x.cols() || b.rows() != 1) {
        throw ShapeError("bias_add: bias " + ShapeToString(b.shape()) +
                         " for input " + ShapeToString(x.shape()));
      }
      Tensor out = x;
      for (std::size_t r = 0; r < x.rows(); ++r) {
        for (std::size_t c = 0; c < x.cols(); ++c) out.at(r, c) += b[c];
      }
      n.value = std::move(out);
      break;
    }
    case OpKind::kAdd:
    case OpKind::kSub:
    case OpKind::kMul: {
      const Tensor& a = in(0);
      const Tensor& b = in(1);
      RequireSameShape(a, b, op);
      Tensor out(a.shape());
      for (std::size_t i = 0; i < a.size(); ++i) {
        out[i] = n.op == OpKind::kAdd   ? a[i] + b[i]
                 : n.op == OpKind::kSub ? a[i] - b[i]
                                        : a[i] * b[i];
      }
      n.value = std::move(out);
      break;
    }
    case OpKind::kScale: {
      Tensor out = in(0);
      for (double& v : out.values()) v *= n.scalar;
      n.value = std::move(out);
      break;
    }
    case OpKind::kRelu: {
      Tensor out = in(0);
      for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
      n.value = std::move(out);
      break;
    }
    case OpKind::kSoftmax:
    case OpKind::kLogSoftmax: {
      const Tensor& x = in(0);
      if (x.rank() == 0 || x.rank() > 2) {
        throw ShapeError(std::string(op) + ": expected rank 1 or 2");
      }
      Tensor out(x.shape());
      const std::size_t cols = x.cols();
      for (std::size_t r = 0; r < x.rows(); ++r) {
        const double* row = &x.data()[r * cols];
        double* orow = &out.data()[r * cols];
        const double mx = *std::max_element(row, row + cols);
        double total = 0.0;
        for (std::size_t c = 0; c < cols; ++c) total += std::exp(row[c] - mx);
        if (n.op == OpKind::kSoftmax) {
          for (std::size_t c = 0; c < cols; ++c) {
            orow[c] = std::exp(row[c] - mx) / total;
          }
        } else {
          const double log_total = std::log(total);
          for (std::size_t c = 0; c < cols; ++c) {
            orow[c] = row[c] - mx - log_total;
          }
        }
      }
      n.value = std::move(out);
      break;
    }
    case OpKind::kLog: {
      Tensor out = in(0);
      for (double& v : out.values()) {
        v = (n.scalar > 0.0 && v < n.scalar) ? 0.0 : std::log(v);
      }
      n.value = std::move(out);
      break;
    }
    case OpKind::kExp: {
      Tensor out = in(0);
      for (double& v : out.values()) v = std::exp(v);
      n.value = std::move(out);
      break;
    }
    case OpKind::kSum:
    case OpKind::kMean: {
      const Tensor& x = in(0);
      if (n.op == OpKind::kMean && x.size() == 0) {
        throw ShapeError("mean of an empty tensor");
      }
      double total = 0.0;
      for (double v : x.values()) total += v;
      n.value = Tensor::Scalar(n.op == OpKind::kSum
                                   ? total
                                   : total / static_cast<double>(x.size()));
      break;
    }
    case OpKind::kSelect:
    case OpKind::kOneHotContract: {
      const Tensor& x = in(0);
      RequireRank2(x, op);
      if (n.labels.size() != x.rows()) {
        throw ShapeError(std::string(op) + ": " +
                         std::to_string(n.labels.size()) + " labels for " +
                         std::to_string(x.rows()) + " rows");
      }
      const std::size_t range =
          n.op == OpKind::kSelect ? x.cols() : n.classes;
      for (int label : n.labels) {
        if (label < 0 || static_cast<std::size_t>(label) >= range) {
          throw ConfigError(std::string(op) + ": label " +
                            std::to_string(label) + " outside [0, " +
                            std::to_string(range) + ")");
        }
      }
      if (n.op == OpKind::kSelect) {
        Tensor out({x.rows()});
        for (std::size_t b = 0; b < x.rows(); ++b) {
          out[b] = x.at(b, static_cast<std::size_t>(n.labels[b]));
        }
        n.value = std::move(out);
      } else {
        Tensor out({x.cols(), n.classes});
        for (std::size_t b = 0; b < x.rows(); ++b) {
          const auto j = static_cast<std::size_t>(n.labels[b]);
          for (std::size_t i = 0; i < x.cols(); ++i) {
            out.at(i, j) += x.at(b, i);
          }
        }
        n.value = std::move(out);
      }
      break;
    }
    case OpKind::kStopGradient:
      n.value = in(0);
      break;
  }

  if (!n.value.AllFinite()) {
    throw NumericError("non-finite value produced by " + std::string(op));
  }
}

void Graph::ZeroGrad() {
  for (Node& n : nodes_) n.grad = Tensor(n.value.shape());
}

void Graph::Backward(NodeId seed, Accumulate mode) {
  if (stale_) throw StateError("Backward() before Forward() on rebound graph");
  const Node& s = node(seed);
  if (s.value.size() != 1) {
    throw ShapeError("backward seed must be scalar, got " +
                     ShapeToString(s.value.shape()));
  }

  // This call's contributions are collected separately so that kSum adds
  // exactly one copy of them to the slots.
  std::vector<Tensor> local(nodes_.size());
  std::vector<bool> reached(nodes_.size(), false);
  local[seed.index] = Tensor(s.value.shape(), 1.0);
  reached[seed.index] = true;

  for (std::size_t i = seed.index + 1; i-- > 0;) {
    if (!reached[i]) continue;
    const Node& n = nodes_[i];
    if (n.op == OpKind::kLeaf || n.op == OpKind::kStopGradient) continue;
    for (NodeId in : n.inputs) {
      if (!reached[in.index]) {
        local[in.index] = Tensor(nodes_[in.index].value.shape());
        reached[in.index] = true;
      }
    }
    const Tensor& g = local[i];
    auto in_val = [&](std::size_t k) -> const Tensor& {
      return nodes_[n.inputs[k].index].value;
    };
    auto in_grad = [&](std::size_t k) -> Tensor& {
      return local[n.inputs[k].index];
    };

    switch (n.op) {
      case OpKind::kLeaf:
      case OpKind::kStopGradient:
        break;
      case OpKind::kMatMul: {
        const Tensor& a = in_val(0);
        const Tensor& b = in_val(1);
        Tensor& da = in_grad(0);
        Tensor& db = in_grad(1);
        const std::size_t m = a.rows(), k = a.cols(), p = b.cols();
        const double* gp = g.data().data();
        const double* ap = a.data().data();
        const double* bp = b.data().data();
        double* dap = da.data().data();
        double* dbp = db.data().data();
        for (std::size_t r = 0; r < m; ++r) {
          const double* grow = gp + r * p;
          for (std::size_t t = 0; t < k; ++t) {
            const double* brow = bp + t * p;
            double acc = 0.0;
            for (std::size_t j = 0; j < p; ++j) acc += grow[j] * brow[j];
            dap[r * k + t] += acc;
          }
        }
        for (std::size_t r = 0; r < m; ++r) {
          const double* grow = gp + r * p;
          for (std::size_t t = 0; t < k; ++t) {
            const double av = ap[r * k + t];
            if (av == 0.0) continue;
            double* dbrow = dbp + t * p;
            for (std::size_t j = 0; j < p; ++j) dbrow[j] += av * grow[j];
          }
        }
        break;
      }
      case OpKind::kBiasAdd: {
        Tensor& dx = in_grad(0);
        Tensor& db = in_grad(1);
        AddInto(dx, g);
        const std::size_t cols = g.cols();
        for (std::size_t r = 0; r < g.rows(); ++r) {
          for (std::size_t c = 0; c < cols; ++c) db[c] += g.at(r, c);
        }
        break;
      }
      case OpKind::kAdd:
        AddInto(in_grad(0), g);
        AddInto(in_grad(1), g);
        break;
      case OpKind::kSub: {
        AddInto(in_grad(0), g);
        Tensor& db = in_grad(1);
        for (std::size_t e = 0; e < g.size(); ++e) db[e] -= g[e];
        break;
      }
      case OpKind::kMul: {
        const Tensor& a = in_val(0);
        const Tensor& b = in_val(1);
        Tensor& da = in_grad(0);
        Tensor& db = in_grad(1);
        for (std::size_t e = 0; e < g.size(); ++e) {
          da[e] += g[e] * b[e];
          db[e] += g[e] * a[e];
        }
        break;
      }
      case OpKind::kScale: {
        Tensor& dx = in_grad(0);
        for (std::size_t e = 0; e < g.size(); ++e) dx[e] += n.scalar * g[e];
        break;
      }
      case OpKind::kRelu: {
        const Tensor& x = in_val(0);
        Tensor& dx = in_grad(0);
        for (std::size_t e = 0; e < g.size(); ++e) {
          if (x[e] > 0.0) dx[e] += g[e];
        }
        break;
      }
      case OpKind::kSoftmax: {
        const Tensor& y = n.value;
        Tensor& dx = in_grad(0);
        const std::size_t cols = y.cols();
        for (std::size_t r = 0; r < y.rows(); ++r) {
          double dot = 0.0;
          for (std::size_t c = 0; c < cols; ++c) dot += g.at(r, c) * y.at(r, c);
          for (std::size_t c = 0; c < cols; ++c) {
            dx.at(r, c) += y.at(r, c) * (g.at(r, c) - dot);
          }
        }
        break;
      }
      case OpKind::kLogSoftmax: {
        const Tensor& y = n.value;
        Tensor& dx = in_grad(0);
        const std::size_t cols = y.cols();
        for (std::size_t r = 0; r < y.rows(); ++r) {
          double total = 0.0;
          for (std::size_t c = 0; c < cols; ++c) total += g.at(r, c);
          for (std::size_t c = 0; c < cols; ++c) {
            dx.at(r, c) += g.at(r, c) - std::exp(y.at(r, c)) * total;
          }
        }
        break;
      }
      case OpKind::kLog: {
        const Tensor& x = in_val(0);
        Tensor& dx = in_grad(0);
        for (std::size_t e = 0; e < g.size(); ++e) {
          if (n.scalar > 0.0 && x[e] < n.scalar) continue;
          dx[e] += g[e] / x[e];
        }
        break;
      }
      case OpKind::kExp: {
        Tensor& dx = in_grad(0);
        for (std::size_t e = 0; e < g.size(); ++e) dx[e] += g[e] * n.value[e];
        break;
      }
      case OpKind::kSum:
      case OpKind::kMean: {
        Tensor& dx = in_grad(0);
        const double scale =
            n.op == OpKind::kSum ? 1.0 : 1.0 / static_cast<double>(dx.size());
        const double gv = g.item() * scale;
        for (double& v : dx.values()) v += gv;
        break;
      }
      case OpKind::kSelect: {
        Tensor& dx = in_grad(0);
        for (std::size_t b = 0; b < n.labels.size(); ++b) {
          dx.at(b, static_cast<std::size_t>(n.labels[b])) += g[b];
        }
        break;
      }
      case OpKind::kOneHotContract: {
        Tensor& dx = in_grad(0);
        const std::size_t cols = dx.cols();
        for (std::size_t b = 0; b < n.labels.size(); ++b) {
          const auto j = static_cast<std::size_t>(n.labels[b]);
          for (std::size_t i = 0; i < cols; ++i) dx.at(b, i) += g.at(i, j);
        }
        break;
      }
    }
  }

  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    Node& n = nodes_[i];
    if (mode == Accumulate::kReset || n.grad.shape() != n.value.shape()) {
      n.grad = reached[i] ? std::move(local[i]) : Tensor(n.value.shape());
    } else if (reached[i]) {
      AddInto(n.grad, local[i]);
    }
  }
}

GradCheckResult CheckGradients(Graph& graph, NodeId seed, NodeId leaf,
                               double step, double tolerance) {
  if (!(step > 0.0)) throw ConfigError("gradient check step must be > 0");
  if (graph.node(leaf).op != OpKind::kLeaf) {
    throw StateError("gradient check target is not a leaf");
  }
  graph.Backward(seed);
  const Tensor analytic = graph.grad(leaf);
  const Tensor original = graph.value(leaf);

  std::vector<NodeId> relu_inputs;
  for (const Node& n : graph.nodes()) {
    if (n.op == OpKind::kRelu) relu_inputs.push_back(n.inputs[0]);
  }
  auto relu_signs = [&] {
    std::vector<bool> signs;
    for (NodeId id : relu_inputs) {
      for (double v : graph.value(id).values()) signs.push_back(v > 0.0);
    }
    return signs;
  };

  GradCheckResult result;
  auto restore = [&] {
    graph.Bind(leaf, original);
    graph.Forward();
  };
  try {
    for (std::size_t e = 0; e < original.size(); ++e) {
      Tensor probe = original;
      probe[e] = original[e] + step;
      graph.Bind(leaf, probe);
      graph.Forward();
      const double f_plus = graph.value(seed).item();
      const auto signs_plus = relu_signs();
      probe[e] = original[e] - step;
      graph.Bind(leaf, probe);
      graph.Forward();
      const double f_minus = graph.value(seed).item();
      if (relu_signs() != signs_plus) {
        ++result.excluded;
        continue;
      }
      const double numeric = (f_plus - f_minus) / (2.0 * step);
      if (!std::isfinite(numeric)) {
        throw NumericError("non-finite difference quotient at element " +
                           std::to_string(e));
      }
      const double err = std::abs(analytic[e] - numeric) /
                         std::max(1.0, std::abs(analytic[e]));
      result.max_relative_error = std::max(result.max_relative_error, err);
      ++result.checked;
    }
  } catch (...) {
    restore();
    throw;
  }
  restore();
  result.passed = result.max_relative_error < tolerance;
  return result;
}

}  // namespace irene::ad
