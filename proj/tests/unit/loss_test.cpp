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

#include "vfpt/head.hpp"
#include "vfpt/loss.hpp"
#include "vfpt/ops.hpp"
#include "vfpt/random.hpp"
#include "vfpt/verify/finite_diff.hpp"

using namespace vfpt;

namespace {

// Score one-hot at the gt cell, offsets and sizes reproducing gt exactly there.
HeadOutputs perfect(const BBox& gt, std::size_t n) {
  HeadOutputs o{Tensor({n, n}), Tensor({2, n, n}, 0.5), Tensor({2, n, n}, 0.1)};
  const auto [i, j] = center_cell(gt, n, n);
  o.score.at(i, j) = 1.0;
  o.offset.at(0, i, j) = gt.cx * n - static_cast<double>(j);
  o.offset.at(1, i, j) = gt.cy * n - static_cast<double>(i);
  o.size.at(0, i, j) = gt.w;
  o.size.at(1, i, j) = gt.h;
  return o;
}

}  // namespace

TEST(GaussianTarget, PeakIsExactlyOne) {
  const BBox gt{0.43, 0.61, 0.2, 0.3};
  const Tensor t = gaussian_target(gt, 8, 8);
  const auto [i, j] = center_cell(gt, 8, 8);
  EXPECT_EQ(i, 4u);
  EXPECT_EQ(j, 3u);
  EXPECT_EQ(t.at(i, j), 1.0);
  for (double v : t.data()) EXPECT_LE(v, 1.0);
}

TEST(GaussianTarget, ReflectionSymmetry) {
  const BBox gt{0.31, 0.77, 0.25, 0.4};
  const BBox mirrored{1.0 - gt.cx, 1.0 - gt.cy, gt.w, gt.h};
  const Tensor a = gaussian_target(gt, 8, 8), b = gaussian_target(mirrored, 8, 8);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 8; ++j) EXPECT_EQ(a.at(i, j), b.at(7 - i, 7 - j));
}

TEST(GaussianTarget, MatchesFormula) {
  const BBox gt{0.9, 0.05, 0.5, 0.6};
  const Tensor t = gaussian_target(gt, 6, 8);
  const double sigma = std::max(1.0, (0.5 * 8 + 0.6 * 6) / 12.0);
  const double ci = 0.0, cj = 7.0;
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 8; ++j) {
      const double d2 = (i - ci) * (i - ci) + (j - cj) * (j - cj);
      EXPECT_NEAR(t.at(i, j), std::exp(-d2 / (2 * sigma * sigma)), 1e-15);
    }
}

TEST(GaussianTarget, CentreOnEdgeClampsToGrid) {
  EXPECT_EQ(center_cell(BBox{1.0, 1.0, 0.1, 0.1}, 4, 4), (std::pair<std::size_t, std::size_t>{3, 3}));
  EXPECT_EQ(center_cell(BBox{-0.2, 0.0, 0.1, 0.1}, 4, 4), (std::pair<std::size_t, std::size_t>{0, 0}));
}

TEST(Focal, PerfectPredictionIsZero) {
  Tensor target({2, 3});
  target.at(1, 1) = 1.0;
  target.at(0, 1) = 0.4;
  Tensor score({2, 3});
  score.at(1, 1) = 1.0;
  EXPECT_EQ(focal_loss(score, target), 0.0);
}

TEST(Focal, DecreasesAsPositiveScoreRises) {
  const Tensor target = gaussian_target(BBox{0.5, 0.5, 0.3, 0.3}, 4, 4);
  Tensor score({4, 4}, 0.2);
  double prev = 1e300;
  for (double p = 0.05; p < 1.0; p += 0.05) {
    score.at(2, 2) = p;
    const double l = focal_loss(score, target);
    EXPECT_LT(l, prev);
    prev = l;
  }
}

TEST(Focal, TwoByTwoHandCase) {
  const Tensor score({2, 2}, std::vector<double>{0.8, 0.3, 0.2, 0.1});
  const Tensor target({2, 2}, std::vector<double>{1.0, 0.5, 0.25, 0.0});
  const double expect = -(0.2 * 0.2 * std::log(0.8)) - std::pow(0.5, 4) * 0.09 * std::log(0.7) -
                        std::pow(0.75, 4) * 0.04 * std::log(0.8) - 1.0 * 0.01 * std::log(0.9);
  EXPECT_NEAR(focal_loss(score, target), expect, 1e-15);
}

TEST(Giou, IdenticalBoxesHaveZeroLoss) {
  const BBox b{0.4, 0.5, 0.2, 0.3};
  EXPECT_EQ(giou_loss(b, b), 0.0);
  EXPECT_EQ(l1_loss(b, b), 0.0);
}

TEST(Giou, DisjointHandCase) {
  const BBox p = BBox::from_corners(0, 0, 1, 1), g = BBox::from_corners(2, 2, 3, 3);
  EXPECT_NEAR(giou(p, g), -7.0 / 9.0, 1e-15);
  EXPECT_NEAR(giou_loss(p, g), 16.0 / 9.0, 1e-15);
}

TEST(Giou, BoundedOverRandomPairs) {
  Rng rng(1);
  for (int k = 0; k < 1000; ++k) {
    const BBox a{rng.uniform(0, 1), rng.uniform(0, 1), rng.uniform(0.01, 1), rng.uniform(0.01, 1)};
    const BBox b{rng.uniform(0, 1), rng.uniform(0, 1), rng.uniform(0.01, 1), rng.uniform(0.01, 1)};
    const double g = giou(a, b);
    EXPECT_GE(g, -1.0);
    EXPECT_LE(g, 1.0);
    EXPECT_NEAR(giou_loss(a, b), 1.0 - g, 1e-12);
  }
}

TEST(TotalLoss, PerfectPredictionIsZero) {
  const BBox gt{0.37, 0.58, 0.22, 0.31};
  const LossValues v = total_loss(perfect(gt, 8), gt, LossWeights{});
  EXPECT_NEAR(v.total, 0.0, 1e-9);
}

TEST(TotalLoss, WeightedSumOfParts) {
  Rng rng(2);
  for (int k = 0; k < 20; ++k) {
    HeadOutputs o{Tensor({8, 8}), Tensor({2, 8, 8}), Tensor({2, 8, 8})};
    rng.fill_uniform(o.score, 0.01, 0.99);
    rng.fill_uniform(o.offset, 0, 1);
    rng.fill_uniform(o.size, 0.05, 0.6);
    const BBox gt{rng.uniform(0.2, 0.8), rng.uniform(0.2, 0.8), rng.uniform(0.1, 0.4), rng.uniform(0.1, 0.4)};
    const LossValues v = total_loss(o, gt, LossWeights{});
    EXPECT_GE(v.total, 0.0);
    EXPECT_NEAR(v.total, v.cls + 2.0 * v.giou + 5.0 * v.l1, 1e-12);
    const auto [i, j] = center_cell(gt, 8, 8);
    EXPECT_EQ(v.giou, giou_loss(cell_box(o, i, j), gt));
    EXPECT_EQ(v.l1, l1_loss(cell_box(o, i, j), gt));
    EXPECT_EQ(v.cls, focal_loss(o.score, gaussian_target(gt, 8, 8)));
  }
}

TEST(TotalLoss, TapedMatchesPlainValues) {
  HeadParams head = init_head(8, 3);
  Rng rng(4);
  Tensor x({8, 4, 4});
  rng.fill_uniform(x, -1, 1);
  const BBox gt{0.6, 0.4, 0.3, 0.2};
  Tape tape;
  const HeadVars h = head_forward(tape, tape.constant(x), head);
  const LossVars lv = total_loss(h, gt, LossWeights{});
  const LossValues plain = total_loss(h.values(), gt, LossWeights{});
  EXPECT_NEAR(lv.total.value()[0], plain.total, 1e-12);
  EXPECT_NEAR(lv.cls.value()[0], plain.cls, 1e-12);
}

TEST(TotalLoss, GradientThroughHeadMatchesFiniteDifferences) {
  HeadParams head = init_head(4, 5);
  Rng rng(6);
  for (Param* p : head.params()) rng.fill_uniform(p->value, -0.6, 0.6);
  Tensor x({4, 3, 3});
  rng.fill_uniform(x, -1, 1);
  const BBox gt{0.45, 0.55, 0.3, 0.35};
  const auto g = verify::check_op(
      "head+loss",
      [&head, gt](Tape& t, const std::vector<Var>& v) {
        return total_loss(head_forward(t, v[0], head), gt, LossWeights{}).total;
      },
      {x}, 7);
  EXPECT_LT(g.rel_err(), 1e-4);
  const auto gp = verify::check_params(
      "head+loss params",
      [&head, &x, gt](Tape& t) { return total_loss(head_forward(t, t.constant(x), head), gt, LossWeights{}).total; },
      head.params(), 8);
  EXPECT_LT(gp.rel_err(), 1e-4);
}
