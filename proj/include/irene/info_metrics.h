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

#ifndef IRENE_INFO_METRICS_H_
#define IRENE_INFO_METRICS_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "irene/autodiff.h"
#include "irene/tensor.h"

namespace irene::info {

// Probabilities below this contribute nothing to any log term.
inline constexpr double kProbabilityFloor = 1e-12;

// Mean over the batch of -log softmax(logits)[label].
ad::NodeId CrossEntropy(ad::Graph& graph, ad::NodeId logits,
                        std::span<const int> labels);

// Graph nodes of a batch joint between soft predictions (rows) and true
// labels (columns).
struct JointNodes {
  ad::NodeId table;         // [C_pred x C_true]
  ad::NodeId row_marginal;  // [C_pred x 1]
  ad::NodeId col_marginal;  // [1 x C_true]
};

// table(i, j) = (1/B) sum_b soft[b, i] * [labels[b] == j]. Each row of
// `soft_predictions` must sum to 1 within 1e-9.
JointNodes JointFromBatch(ad::Graph& graph, ad::NodeId soft_predictions,
                          std::span<const int> labels, std::size_t n_true);

// Variant whose column marginal is a fixed prior (e.g. dataset-wide label
// frequencies) instead of the batch column sums.
JointNodes JointFromBatchWithPrior(ad::Graph& graph,
                                   ad::NodeId soft_predictions,
                                   std::span<const int> labels,
                                   std::span<const double> prior);

// sum_ij p(i,j) log(p(i,j) / (p_i p_j)) in nats.
ad::NodeId MiProxy(ad::Graph& graph, const JointNodes& joint);

// Value snapshot of a joint with its invariants checked.
struct JointDistribution {
  Tensor table;
  std::vector<double> row_marginal;
  std::vector<double> col_marginal;

  // Throws NumericError when an entry is negative, the table does not sum to
  // one within 1e-12, or a marginal disagrees with the table sums.
  void Validate() const;
};

JointDistribution ReadJoint(const ad::Graph& graph, const JointNodes& joint);

// Convenience: MI proxy value of softmax-free soft predictions.
double MiProxyValue(const Tensor& soft_predictions, std::span<const int> labels,
                    std::size_t n_true);

// Empirical joint of two discrete labels, as a count table.
struct LabelJoint {
  std::size_t rows = 0;  // K
  std::size_t cols = 0;  // C
  std::vector<std::int64_t> counts;
  std::int64_t total = 0;

  static LabelJoint FromLabels(std::span<const int> a, std::span<const int> b,
                               std::size_t k, std::size_t c);
};

// Mutual information (nats) of the empirical distribution.
double LabelMi(const LabelJoint& joint);

// Mutual information (nats) of a probability table [K x C] summing to 1.
double MutualInformation(const Tensor& probabilities);

}  // namespace irene::info

#endif  // IRENE_INFO_METRICS_H_
