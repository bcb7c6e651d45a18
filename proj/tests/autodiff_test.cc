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

#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "irene/error.h"
#include "irene/info_metrics.h"
#include "oracles.h"

namespace irene::ad {
namespace {

Tensor FromMatrix(const oracle::Matrix& m) {
  return Tensor({m.size(), m[0].size()}, oracle::Flatten(m));
}

TEST(GraphForward, ReluOfMatMul) {
  Graph g;
  const NodeId x = g.Leaf(Tensor({1, 2}, {1.0, 2.0}), "x");
  const NodeId w = g.Leaf(Tensor({2, 2}, {1.0, 0.0, 0.0, -1.0}), "w");
  const NodeId out = g.Relu(g.MatMul(x, w));
  EXPECT_EQ(g.value(out).values(), (std::vector<double>{1.0, 0.0}));
}

TEST(GraphForward, LeafOnlyGraphReturnsInput) {
  Graph g;
  g.Leaf(Tensor({3}, {1.0, -2.0, 3.5}), "x");
  const Tensor& out = g.Forward({{"x", Tensor({3}, {4.0, 5.0, 6.0})}});
  EXPECT_EQ(out.values(), (std::vector<double>{4.0, 5.0, 6.0}));
}

TEST(GraphForward, ThreeLayerMlpMatchesStraightLine) {
  std::mt19937_64 gen(7);
  const auto x = oracle::RandomMatrix(gen, 5, 4);
  const auto w0 = oracle::RandomMatrix(gen, 4, 6);
  const auto w1 = oracle::RandomMatrix(gen, 6, 3);
  const auto w2 = oracle::RandomMatrix(gen, 3, 2);
  const std::vector<double> b0{0.1, -0.2, 0.3, 0.0, 0.5, -0.6};
  const std::vector<double> b1{0.2, 0.0, -0.1};
  const std::vector<double> b2{-0.3, 0.4};

  Graph g;
  NodeId h = g.Leaf(FromMatrix(x), "x");
  h = g.Relu(g.BiasAdd(g.MatMul(h, g.Leaf(FromMatrix(w0))),
                       g.Leaf(Tensor({6}, b0))));
  h = g.Relu(g.BiasAdd(g.MatMul(h, g.Leaf(FromMatrix(w1))),
                       g.Leaf(Tensor({3}, b1))));
  h = g.BiasAdd(g.MatMul(h, g.Leaf(FromMatrix(w2))), g.Leaf(Tensor({2}, b2)));

  const auto expected = oracle::Dense(
      oracle::Dense(oracle::Dense(x, w0, b0, true), w1, b1, true), w2, b2,
      false);
  const auto flat = oracle::Flatten(expected);
  ASSERT_EQ(g.value(h).size(), flat.size());
  for (std::size_t i = 0; i < flat.size(); ++i) {
    EXPECT_NEAR(g.value(h)[i], flat[i], 1e-12);
  }
}

TEST(GraphBackward, SumOfSquares) {
  Graph g;
  const NodeId x = g.Leaf(Tensor({3}, {1.0, 2.0, 3.0}), "x");
  const NodeId loss = g.Sum(g.Mul(x, x));
  g.Backward(loss);
  EXPECT_EQ(g.grad(x).values(), (std::vector<double>{2.0, 4.0, 6.0}));
}

TEST(GraphBackward, StopGradientBlocksEverything) {
  Graph g;
  const NodeId x = g.Leaf(Tensor({3}, {1.0, 2.0, 3.0}), "x");
  const NodeId loss = g.Sum(g.Mul(g.StopGradient(x), g.StopGradient(x)));
  g.Backward(loss);
  EXPECT_EQ(g.grad(x).values(), (std::vector<double>{0.0, 0.0, 0.0}));
}

TEST(GraphBackward, TwoClassCrossEntropyGradient) {
  Graph g;
  const NodeId logits = g.Leaf(Tensor({1, 2}, {0.3, -0.3}), "logits");
  const std::vector<int> labels{0};
  const NodeId loss = info::CrossEntropy(g, logits, labels);
  g.Backward(loss);
  const double s0 = 1.0 / (1.0 + std::exp(-0.6));
  EXPECT_NEAR(g.grad(logits)[0], s0 - 1.0, 1e-12);
  EXPECT_NEAR(g.grad(logits)[1], 1.0 - s0, 1e-12);
  EXPECT_NEAR(g.grad(logits)[0], -0.3543, 1e-4);

  auto f = [&](const std::vector<double>& v) {
    return oracle::CrossEntropy({v}, labels);
  };
  for (std::size_t i = 0; i < 2; ++i) {
    const double fd = oracle::CentralDifference(f, {0.3, -0.3}, i, 1e-6);
    EXPECT_NEAR(g.grad(logits)[i], fd, 1e-4);
  }
}

TEST(GraphBackward, NonScalarSeedRejected) {
  Graph g;
  const NodeId x = g.Leaf(Tensor({2}, {1.0, 2.0}), "x");
  EXPECT_THROW(g.Backward(x), ShapeError);
}

TEST(StopGradient, ForwardValueIsBitIdentical) {
  Graph g;
  const NodeId x = g.Leaf(Tensor({2, 2}, {0.1, -0.7, 3.3, 1e-9}), "x");
  const NodeId a = g.Softmax(x);
  const NodeId b = g.StopGradient(a);
  EXPECT_EQ(g.value(a), g.value(b));
}

TEST(StopGradient, OnlyUnblockedTermContributes) {
  const Tensor x0({3}, {0.5, -1.5, 2.0});
  // loss = sum(x*x) + sum(exp(stop(x)))
  Graph with;
  const NodeId x = with.Leaf(x0, "x");
  const NodeId loss =
      with.Add(with.Sum(with.Mul(x, x)), with.Sum(with.Exp(with.StopGradient(x))));
  with.Backward(loss);

  Graph without;
  const NodeId y = without.Leaf(x0, "x");
  const NodeId loss2 = without.Sum(without.Mul(y, y));
  without.Backward(loss2);
  EXPECT_EQ(with.grad(x), without.grad(y));
}

TEST(StopGradient, AncestorsReachableOnlyThroughBlockGetZero) {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 20; ++trial) {
    Graph g;
    const NodeId a = g.Leaf(FromMatrix(oracle::RandomMatrix(gen, 3, 4)), "a");
    const NodeId w = g.Leaf(FromMatrix(oracle::RandomMatrix(gen, 4, 2)), "w");
    const NodeId c = g.Leaf(FromMatrix(oracle::RandomMatrix(gen, 3, 2)), "c");
    const NodeId blocked = g.StopGradient(g.Relu(g.MatMul(a, w)));
    const NodeId loss = g.Mean(g.Mul(g.Exp(blocked), c));
    g.Backward(loss);
    for (double v : g.grad(a).values()) EXPECT_EQ(v, 0.0);
    for (double v : g.grad(w).values()) EXPECT_EQ(v, 0.0);
    EXPECT_TRUE(std::any_of(g.grad(c).values().begin(), g.grad(c).values().end(),
                            [](double v) { return v != 0.0; }));
  }
}

TEST(CheckGradients, QuadraticIsExact) {
  Graph g;
  const NodeId x = g.Leaf(Tensor({4}, {0.3, -1.0, 2.0, 0.7}), "x");
  const NodeId loss = g.Sum(g.Mul(x, x));
  const GradCheckResult r = CheckGradients(g, loss, x, 1e-6, 1e-6);
  EXPECT_TRUE(r.passed);
  EXPECT_LT(r.max_relative_error, 1e-6);
  EXPECT_EQ(r.checked, 4u);
}

TEST(CheckGradients, MiProxyOnRandomLogits) {
  std::mt19937_64 gen(3);
  Graph g;
  const NodeId logits = g.Leaf(FromMatrix(oracle::RandomMatrix(gen, 4, 3)), "v");
  const std::vector<int> labels{0, 2, 1, 2};
  const auto joint = info::JointFromBatch(g, g.Softmax(logits), labels, 3);
  const NodeId mi = info::MiProxy(g, joint);
  const GradCheckResult r = CheckGradients(g, mi, logits, 1e-6, 1e-4);
  EXPECT_TRUE(r.passed) << r.max_relative_error;
  EXPECT_LT(r.max_relative_error, 1e-4);
}

TEST(CheckGradients, ReluKinkIsExcludedNotFailed) {
  Graph g;
  const NodeId x = g.Leaf(Tensor({3}, {0.0, 1.0, -2.0}), "x");
  const NodeId loss = g.Sum(g.Relu(x));
  const GradCheckResult r = CheckGradients(g, loss, x, 1e-6, 1e-6);
  EXPECT_TRUE(r.passed);
  EXPECT_EQ(r.excluded, 1u);
  EXPECT_EQ(r.checked, 2u);
  EXPECT_EQ(g.grad(x)[0], 0.0);  // subgradient at 0
}

// Every differentiable op at 100 random points.
class OpGradient : public ::testing::TestWithParam<int> {};

NodeId BuildOp(Graph& g, int op, NodeId x, NodeId y, NodeId w, NodeId b,
               const std::vector<int>& labels) {
  switch (op) {
    case 0: return g.Sum(g.Mul(g.MatMul(x, w), g.MatMul(x, w)));
    case 1: return g.Sum(g.Mul(g.BiasAdd(x, b), y));
    case 2: return g.Sum(g.Mul(g.Add(x, y), x));
    case 3: return g.Sum(g.Mul(g.Sub(x, y), x));
    case 4: return g.Sum(g.Mul(x, y));
    case 5: return g.Sum(g.Mul(g.Scale(x, -2.5), x));
    case 6: return g.Sum(g.Mul(g.Relu(x), y));
    case 7: return g.Sum(g.Mul(g.Softmax(x), y));
    case 8: return g.Sum(g.Mul(g.LogSoftmax(x), y));
    case 9: return g.Sum(g.Mul(g.Log(g.Exp(x), 1e-12), y));
    case 10: return g.Sum(g.Mul(g.Exp(x), y));
    case 11: return g.Mean(g.Mul(x, x));
    case 12: return g.Sum(g.Mul(g.Select(x, labels), g.Select(x, labels)));
    default: {
      const NodeId t = g.OneHotContract(g.Softmax(x), labels, 3);
      return g.Sum(g.Mul(t, t));
    }
  }
}

TEST_P(OpGradient, MatchesFiniteDifferences) {
  std::mt19937_64 gen(100 + GetParam());
  std::size_t checked = 0;
  for (int point = 0; point < 100; ++point) {
    Graph g;
    const NodeId x = g.Leaf(FromMatrix(oracle::RandomMatrix(gen, 4, 3)), "x");
    const NodeId y = g.Leaf(FromMatrix(oracle::RandomMatrix(gen, 4, 3)), "y");
    const NodeId w = g.Leaf(FromMatrix(oracle::RandomMatrix(gen, 3, 2)), "w");
    const NodeId b = g.Leaf(Tensor({3}, {0.1, -0.4, 0.9}), "b");
    const std::vector<int> labels{2, 0, 1, 1};
    const NodeId loss = BuildOp(g, GetParam(), x, y, w, b, labels);
    for (NodeId leaf : {x, w, b}) {
      const GradCheckResult r = CheckGradients(g, loss, leaf, 1e-6, 1e-4);
      EXPECT_TRUE(r.passed) << "op " << GetParam() << " point " << point
                            << " err " << r.max_relative_error;
      checked += r.checked;
    }
  }
  EXPECT_GT(checked, 0u);
}

INSTANTIATE_TEST_SUITE_P(AllOps, OpGradient, ::testing::Range(0, 14));

TEST(BackwardProperties, LinearInTheSeed) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> coef(-3.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    const Tensor x0 = FromMatrix(oracle::RandomMatrix(gen, 3, 4));
    const Tensor w0 = FromMatrix(oracle::RandomMatrix(gen, 4, 3));
    const double a = coef(gen), c = coef(gen);
    const std::vector<int> labels{0, 2, 1};

    auto grads = [&](double ka, double kc) {
      Graph g;
      const NodeId x = g.Leaf(x0, "x");
      const NodeId w = g.Leaf(w0, "w");
      const NodeId logits = g.MatMul(x, w);
      const NodeId l1 = info::CrossEntropy(g, logits, labels);
      const NodeId l2 = g.Mean(g.Mul(g.Relu(logits), logits));
      NodeId seed;
      if (kc == 0.0) {
        seed = g.Scale(l1, ka);
      } else if (ka == 0.0) {
        seed = g.Scale(l2, kc);
      } else {
        seed = g.Add(g.Scale(l1, ka), g.Scale(l2, kc));
      }
      g.Backward(seed);
      return g.grad(w);
    };
    const Tensor combined = grads(a, c);
    const Tensor g1 = grads(a, 0.0);
    const Tensor g2 = grads(0.0, c);
    for (std::size_t i = 0; i < combined.size(); ++i) {
      EXPECT_NEAR(combined[i], g1[i] + g2[i], 1e-12);
    }
  }
}

TEST(BackwardProperties, Deterministic) {
  auto run = [] {
    std::mt19937_64 gen(9);
    Graph g;
    const NodeId x = g.Leaf(FromMatrix(oracle::RandomMatrix(gen, 6, 5)), "x");
    const NodeId w = g.Leaf(FromMatrix(oracle::RandomMatrix(gen, 5, 4)), "w");
    const std::vector<int> labels{0, 1, 2, 3, 0, 1};
    const auto joint = info::JointFromBatch(g, g.Softmax(g.MatMul(x, w)), labels, 4);
    const NodeId mi = info::MiProxy(g, joint);
    g.Backward(mi);
    return std::make_pair(g.value(mi), g.grad(w));
  };
  EXPECT_EQ(run(), run());
}

TEST(BackwardProperties, ResetAndSumAccumulation) {
  Graph g;
  const NodeId x = g.Leaf(Tensor({2}, {1.0, 3.0}), "x");
  const NodeId a = g.Sum(g.Mul(x, x));
  const NodeId b = g.Sum(x);
  g.Backward(a);
  g.Backward(b, Accumulate::kSum);
  EXPECT_EQ(g.grad(x).values(), (std::vector<double>{3.0, 7.0}));
  g.Backward(b);
  EXPECT_EQ(g.grad(x).values(), (std::vector<double>{1.0, 1.0}));
}

TEST(GraphState, BindRequiresForwardBeforeBackward) {
  Graph g;
  const NodeId x = g.Leaf(Tensor({2}, {1.0, 2.0}), "x");
  const NodeId loss = g.Sum(g.Mul(x, x));
  g.Bind("x", Tensor({2}, {3.0, 4.0}));
  EXPECT_TRUE(g.stale());
  EXPECT_THROW(g.Backward(loss), StateError);
  g.Forward();
  EXPECT_EQ(g.value(loss).item(), 25.0);
  g.Backward(loss);
  EXPECT_EQ(g.grad(x).values(), (std::vector<double>{6.0, 8.0}));
}

TEST(GraphState, ShapeMismatchesAreRejected) {
  Graph g;
  const NodeId x = g.Leaf(Tensor({2, 3}), "x");
  const NodeId w = g.Leaf(Tensor({2, 3}), "w");
  EXPECT_THROW(g.MatMul(x, w), ShapeError);
  EXPECT_THROW(g.Bind(x, Tensor({3, 2})), ShapeError);
  EXPECT_THROW(g.Leaf(Tensor({1}), "x"), StateError);
}

TEST(GraphState, NonFiniteForwardThrows) {
  Graph g;
  const NodeId x = g.Leaf(Tensor({1}, {1.0}), "x");
  const NodeId y = g.Exp(g.Scale(x, 1e2));
  // Operations evaluate eagerly, so overflow surfaces at recording time.
  EXPECT_THROW(g.Exp(g.Scale(x, 1e6)), NumericError);
  g.Bind(x, Tensor({1}, {1e4}));
  EXPECT_THROW(g.Forward(), NumericError);
  (void)y;
}

}  // namespace
}  // namespace irene::ad
