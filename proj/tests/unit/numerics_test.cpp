// Copyright 2026 The vfpt Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>

#include "vfpt/autograd.hpp"
#include "vfpt/errors.hpp"
#include "vfpt/ops.hpp"
#include "vfpt/random.hpp"
#include "vfpt/verify/finite_diff.hpp"
#include "vfpt/verify/oracles.hpp"

using namespace vfpt;

namespace {

Tensor rand_tensor(Rng& rng, Shape s, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(s));
  rng.fill_uniform(t, lo, hi);
  return t;
}

Tensor eye(std::size_t n) {
  Tensor t({n, n});
  for (std::size_t i = 0; i < n; ++i) t.at(i, i) = 1.0;
  return t;
}

}  // namespace

TEST(Linear, IdentityWeightsReturnInput) {
  Tape tape;
  Var y = ops::linear(tape.constant(eye(2)), tape.constant(eye(2)), tape.constant(Tensor({2})));
  EXPECT_EQ(y.value(), eye(2));
}

TEST(Linear, ZeroInputBroadcastsBias) {
  Tape tape;
  Tensor b({3}, std::vector<double>{0.5, -1.0, 2.0});
  Var y = ops::linear(tape.constant(Tensor({4, 2})), tape.constant(Tensor({2, 3}, 1.0)), tape.constant(b));
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(y.value().at(i, j), b[j]);
}

TEST(Linear, WeightGradientMatchesFiniteDifferences) {
  Rng rng(3);
  const Tensor x = rand_tensor(rng, {3, 4});
  const Tensor b = rand_tensor(rng, {5});
  const auto g = verify::check_op(
      "linear W",
      [&](Tape& t, const std::vector<Var>& v) { return ops::sum(ops::linear(t.constant(x), v[0], t.constant(b))); },
      {rand_tensor(rng, {4, 5})}, 1, 1e-5);
  EXPECT_LT(g.rel_err(), 1e-6);
}

TEST(Linear, MatchesLoopMatmul) {
  Rng rng(4);
  const Tensor a = rand_tensor(rng, {5, 7}), b = rand_tensor(rng, {7, 3});
  EXPECT_LT(max_abs_diff(kernels::matmul(a, b), verify::matmul_reference(a, b)), 1e-14);
}

TEST(LayerNorm, ZeroInputGivesZero) {
  Tape tape;
  Var y = ops::layer_norm(tape.constant(Tensor({2, 5})), tape.constant(Tensor({5}, 1.0)), tape.constant(Tensor({5})),
                          1e-6);
  EXPECT_EQ(y.value(), Tensor({2, 5}));
}

TEST(LayerNorm, RowsHaveZeroMeanUnitVariance) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor x = rand_tensor(rng, {4, 16}, -3, 3);
    const Tensor y = kernels::layer_norm(x, Tensor({16}, 1.0), Tensor({16}), 1e-12);
    for (std::size_t i = 0; i < 4; ++i) {
      double mean = 0.0, var = 0.0;
      for (std::size_t j = 0; j < 16; ++j) mean += y.at(i, j);
      mean /= 16.0;
      for (std::size_t j = 0; j < 16; ++j) var += (y.at(i, j) - mean) * (y.at(i, j) - mean);
      var /= 16.0;
      EXPECT_LT(std::abs(mean), 1e-12);
      EXPECT_NEAR(var, 1.0, 1e-9);
    }
  }
}

TEST(LayerNorm, MatchesReference) {
  Rng rng(6);
  const Tensor x = rand_tensor(rng, {3, 8}), g = rand_tensor(rng, {8}), b = rand_tensor(rng, {8});
  EXPECT_LT(max_abs_diff(kernels::layer_norm(x, g, b, 1e-6), verify::layer_norm_reference(x, g, b, 1e-6)), 1e-14);
}

TEST(LayerNorm, GradientMatchesFiniteDifferences) {
  Rng rng(7);
  const auto g = verify::check_op(
      "layer_norm",
      [](Tape&, const std::vector<Var>& v) { return ops::layer_norm(v[0], v[1], v[2], 1e-6); },
      {rand_tensor(rng, {2, 3}), rand_tensor(rng, {3}), rand_tensor(rng, {3})}, 2, 1e-5);
  EXPECT_LT(g.rel_err(), 1e-5);
}

TEST(Softmax, SymmetricInputIsUniform) {
  const Tensor y = kernels::softmax(Tensor({1, 2}), 1);
  EXPECT_EQ(y[0], 0.5);
  EXPECT_EQ(y[1], 0.5);
}

TEST(Softmax, LargeLogitsStayFinite) {
  const Tensor y = kernels::softmax(Tensor({1, 2}, 1000.0), 1);
  EXPECT_TRUE(all_finite(y));
  EXPECT_EQ(y[0], 0.5);
  EXPECT_EQ(y[1], 0.5);
}

TEST(Gelu, GradientMatchesFiniteDifferences) {
  Rng rng(8);
  const auto g = verify::check_op("gelu", [](Tape&, const std::vector<Var>& v) { return ops::gelu(v[0]); },
                                  {rand_tensor(rng, {4, 6}, -4, 4)}, 3, 1e-5);
  EXPECT_LT(g.rel_err(), 1e-5);
}

TEST(Conv2d, DeltaKernelIsIdentity) {
  Rng rng(9);
  const Tensor x = rand_tensor(rng, {3, 5, 4});
  Tensor w({3, 3, 3, 3});
  for (std::size_t c = 0; c < 3; ++c) w[((c * 3 + c) * 3 + 1) * 3 + 1] = 1.0;
  Tape tape;
  Var y = ops::conv2d(tape.constant(x), tape.constant(w), tape.constant(Tensor({3})));
  EXPECT_EQ(y.value(), x);
}

TEST(Conv2d, ZeroWeightsGiveZero) {
  Rng rng(10);
  Tape tape;
  Var y = ops::conv2d(tape.constant(rand_tensor(rng, {2, 4, 4})), tape.constant(Tensor({3, 2, 3, 3})),
                      tape.constant(Tensor({3})));
  EXPECT_EQ(y.value(), Tensor({3, 4, 4}));
}

TEST(Conv2d, MatchesLoopOracle) {
  Rng rng(11);
  const Tensor x = rand_tensor(rng, {2, 4, 4}), w = rand_tensor(rng, {3, 2, 3, 3}), b = rand_tensor(rng, {3});
  Tape tape;
  Var y = ops::conv2d(tape.constant(x), tape.constant(w), tape.constant(b));
  EXPECT_LT(max_abs_diff(y.value(), verify::conv3x3_reference(x, w, b)), 1e-12);
}

TEST(Ops, ForwardIsDeterministic) {
  Rng rng(12);
  const Tensor qkv = rand_tensor(rng, {6, 24}), x = rand_tensor(rng, {2, 5, 5}), w = rand_tensor(rng, {3, 2, 3, 3});
  Tape t1, t2;
  EXPECT_EQ(ops::attention(t1.constant(qkv), 4).value(), ops::attention(t2.constant(qkv), 4).value());
  EXPECT_EQ(ops::conv2d(t1.constant(x), t1.constant(w), t1.constant(Tensor({3}))).value(),
            ops::conv2d(t2.constant(x), t2.constant(w), t2.constant(Tensor({3}))).value());
}

TEST(Autograd, LinearGeluChainMatchesFiniteDifferences) {
  Rng rng(13);
  const auto g = verify::check_op(
      "linear-gelu-linear-gelu",
      [](Tape&, const std::vector<Var>& v) {
        return ops::gelu(ops::linear(ops::gelu(ops::linear(v[0], v[1], v[2])), v[3], v[4]));
      },
      {rand_tensor(rng, {3, 4}), rand_tensor(rng, {4, 6}), rand_tensor(rng, {6}), rand_tensor(rng, {6, 2}),
       rand_tensor(rng, {2})},
      4, 1e-5);
  EXPECT_LT(g.rel_err(), 1e-4);
}

TEST(Autograd, ReusedOperandAccumulatesGradient) {
  Tape tape;
  Var x = tape.variable(Tensor({2}, std::vector<double>{1.0, 2.0}));
  Var y = ops::sum(ops::add(x, ops::scale(x, 3.0)));
  tape.backward(y);
  EXPECT_EQ(tape.grad(x)[0], 4.0);
  EXPECT_EQ(tape.grad(x)[1], 4.0);
}

TEST(Autograd, LeafGradientsReachParams) {
  Param p("p", Tensor({3}, std::vector<double>{1, 2, 3}), true);
  p.grad = Tensor({3});
  Tape tape;
  tape.backward(ops::sum(ops::scale(tape.leaf(p), 2.0)));
  EXPECT_EQ(p.grad, Tensor({3}, 2.0));
}

TEST(Attention, MatchesLoopOracle) {
  Rng rng(14);
  const Tensor x = rand_tensor(rng, {4, 8}), w = rand_tensor(rng, {8, 24}), b = rand_tensor(rng, {24});
  Tape tape;
  Var y = ops::attention(ops::linear(tape.constant(x), tape.constant(w), tape.constant(b)), 2);
  EXPECT_LT(max_abs_diff(y.value(), verify::attention_reference(x, w, b, 2)), 1e-10);
}

TEST(Ops, ShapeMismatchThrowsDimensionError) {
  Tape tape;
  EXPECT_THROW(ops::add(tape.constant(Tensor({2, 3})), tape.constant(Tensor({3, 2}))), DimensionError);
  EXPECT_THROW(ops::linear(tape.constant(Tensor({2, 3})), tape.constant(Tensor({4, 2})), Var{}), DimensionError);
}
