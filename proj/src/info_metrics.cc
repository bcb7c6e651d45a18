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

#include "irene/info_metrics.h"

#include <cmath>
#include <string>

#include "irene/error.h"

namespace irene::info {
namespace {

// Below this magnitude the proxy is indistinguishable from rounding noise
// in the table arithmetic, and is reported as exactly zero.
constexpr double kMiResolution = 1e-14;

void CheckSoftRows(const Tensor& soft) {
  if (soft.rank() != 2) {
    throw ShapeError("soft predictions must be [B x C], got " +
                     ShapeToString(soft.shape()));
  }
  if (soft.rows() == 0) throw ConfigError("joint of an empty batch");
  for (std::size_t b = 0; b < soft.rows(); ++b) {
    double total = 0.0;
    for (std::size_t i = 0; i < soft.cols(); ++i) {
      const double v = soft.at(b, i);
      if (v < 0.0) {
        throw ConfigError("soft prediction row " + std::to_string(b) +
                          " has a negative entry");
      }
      total += v;
    }
    if (std::abs(total - 1.0) > 1e-9) {
      throw ConfigError("soft prediction row " + std::to_string(b) +
                        " sums to " + std::to_string(total) + ", not 1");
    }
  }
}

ad::NodeId Ones(ad::Graph& graph, std::size_t rows, std::size_t cols) {
  return graph.Leaf(Tensor({rows, cols}, 1.0));
}

ad::NodeId Table(ad::Graph& graph, ad::NodeId soft,
                 std::span<const int> labels, std::size_t n_true) {
  CheckSoftRows(graph.value(soft));
  if (n_true == 0) throw ConfigError("joint needs at least one true class");
  const ad::NodeId counts = graph.OneHotContract(soft, labels, n_true);
  return graph.Scale(counts, 1.0 / static_cast<double>(labels.size()));
}

}  // namespace

ad::NodeId CrossEntropy(ad::Graph& graph, ad::NodeId logits,
                        std::span<const int> labels) {
  const ad::NodeId log_probs = graph.LogSoftmax(logits);
  const ad::NodeId picked = graph.Select(log_probs, labels);
  return graph.Scale(graph.Mean(picked), -1.0);
}

JointNodes JointFromBatch(ad::Graph& graph, ad::NodeId soft_predictions,
                          std::span<const int> labels, std::size_t n_true) {
  const ad::NodeId table = Table(graph, soft_predictions, labels, n_true);
  const std::size_t n_pred = graph.value(table).rows();
  JointNodes joint;
  joint.table = table;
  joint.row_marginal = graph.MatMul(table, Ones(graph, n_true, 1));
  joint.col_marginal = graph.MatMul(Ones(graph, 1, n_pred), table);
  return joint;
}

JointNodes JointFromBatchWithPrior(ad::Graph& graph,
                                   ad::NodeId soft_predictions,
                                   std::span<const int> labels,
                                   std::span<const double> prior) {
  double total = 0.0;
  for (double p : prior) {
    if (!(p >= 0.0)) throw ConfigError("label prior has a negative entry");
    total += p;
  }
  if (prior.empty() || std::abs(total - 1.0) > 1e-9) {
    throw ConfigError("label prior must be a probability vector");
  }
  const ad::NodeId table =
      Table(graph, soft_predictions, labels, prior.size());
  JointNodes joint;
  joint.table = table;
  joint.row_marginal = graph.MatMul(table, Ones(graph, prior.size(), 1));
  joint.col_marginal = graph.Leaf(
      Tensor({1, prior.size()}, std::vector<double>(prior.begin(), prior.end())));
  return joint;
}

ad::NodeId MiProxy(ad::Graph& graph, const JointNodes& joint) {
  // Outer product of the marginals: inner dimension 1, so each entry is a
  // single rounded product.
  const ad::NodeId independent =
      graph.MatMul(joint.row_marginal, joint.col_marginal);
  // p(i,j) >= floor implies p_i * p_j >= floor^2, so the second log is exact
  // on every term that survives the first.
  const ad::NodeId log_joint = graph.Log(joint.table, kProbabilityFloor);
  const ad::NodeId log_independent =
      graph.Log(independent, kProbabilityFloor * kProbabilityFloor);
  const ad::NodeId log_ratio = graph.Sub(log_joint, log_independent);
  return graph.Sum(graph.Mul(joint.table, log_ratio));
}

void JointDistribution::Validate() const {
  if (table.rank() != 2 || row_marginal.size() != table.rows() ||
      col_marginal.size() != table.cols()) {
    throw ShapeError("joint distribution with inconsistent shapes");
  }
  double total = 0.0;
  std::vector<double> rows(table.rows(), 0.0), cols(table.cols(), 0.0);
  for (std::size_t i = 0; i < table.rows(); ++i) {
    for (std::size_t j = 0; j < table.cols(); ++j) {
      const double p = table.at(i, j);
      if (p < 0.0) throw NumericError("joint has a negative entry");
      total += p;
      rows[i] += p;
      cols[j] += p;
    }
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw NumericError("joint sums to " + std::to_string(total));
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (std::abs(rows[i] - row_marginal[i]) > 1e-12) {
      throw NumericError("row marginal disagrees with table");
    }
  }
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (std::abs(cols[j] - col_marginal[j]) > 1e-12) {
      throw NumericError("column marginal disagrees with table");
    }
  }
}

JointDistribution ReadJoint(const ad::Graph& graph, const JointNodes& joint) {
  JointDistribution out;
  out.table = graph.value(joint.table);
  out.row_marginal = graph.value(joint.row_marginal).values();
  out.col_marginal = graph.value(joint.col_marginal).values();
  out.Validate();
  return out;
}

double MiProxyValue(const Tensor& soft_predictions, std::span<const int> labels,
                    std::size_t n_true) {
  ad::Graph graph;
  const ad::NodeId soft = graph.Leaf(soft_predictions);
  const ad::NodeId mi =
      MiProxy(graph, JointFromBatch(graph, soft, labels, n_true));
  const double value = graph.value(mi).item();
  return std::abs(value) < kMiResolution ? 0.0 : value;
}

LabelJoint LabelJoint::FromLabels(std::span<const int> a,
                                  std::span<const int> b, std::size_t k,
                                  std::size_t c) {
  if (a.size() != b.size()) throw ShapeError("label vectors differ in length");
  LabelJoint joint;
  joint.rows = k;
  joint.cols = c;
  joint.counts.assign(k * c, 0);
  for (std::size_t s = 0; s < a.size(); ++s) {
    if (a[s] < 0 || static_cast<std::size_t>(a[s]) >= k || b[s] < 0 ||
        static_cast<std::size_t>(b[s]) >= c) {
      throw ConfigError("label out of range at sample " + std::to_string(s));
    }
    ++joint.counts[static_cast<std::size_t>(a[s]) * c +
                   static_cast<std::size_t>(b[s])];
  }
  joint.total = static_cast<std::int64_t>(a.size());
  return joint;
}

double LabelMi(const LabelJoint& joint) {
  if (joint.counts.size() != joint.rows * joint.cols) {
    throw ShapeError("label joint counts do not match its shape");
  }
  std::int64_t total = 0;
  std::vector<std::int64_t> rows(joint.rows, 0), cols(joint.cols, 0);
  for (std::size_t i = 0; i < joint.rows; ++i) {
    for (std::size_t j = 0; j < joint.cols; ++j) {
      const std::int64_t n = joint.counts[i * joint.cols + j];
      if (n < 0) throw ConfigError("negative count in label joint");
      rows[i] += n;
      cols[j] += n;
      total += n;
    }
  }
  if (total <= 0 || total != joint.total) {
    throw ConfigError("label joint total must be positive and match counts");
  }
  const double t = static_cast<double>(total);
  double mi = 0.0;
  for (std::size_t i = 0; i < joint.rows; ++i) {
    for (std::size_t j = 0; j < joint.cols; ++j) {
      const std::int64_t n = joint.counts[i * joint.cols + j];
      if (n == 0) continue;
      // Ratio from integer products so that independence gives exactly 1.
      const double num = static_cast<double>(n) * t;
      const double den =
          static_cast<double>(rows[i]) * static_cast<double>(cols[j]);
      mi += (static_cast<double>(n) / t) * std::log(num / den);
    }
  }
  return mi;
}

double MutualInformation(const Tensor& probabilities) {
  if (probabilities.rank() != 2) {
    throw ShapeError("probability table must be rank 2");
  }
  const std::size_t k = probabilities.rows(), c = probabilities.cols();
  std::vector<double> rows(k, 0.0), cols(c, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      const double p = probabilities.at(i, j);
      if (p < 0.0) throw ConfigError("negative probability");
      rows[i] += p;
      cols[j] += p;
      total += p;
    }
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw ConfigError("probability table does not sum to 1");
  }
  double mi = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      const double p = probabilities.at(i, j);
      if (p < kProbabilityFloor) continue;
      mi += p * std::log(p / (rows[i] * cols[j]));
    }
  }
  return mi;
}

}  // namespace irene::info
