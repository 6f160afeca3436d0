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
#include <filesystem>
#include <fstream>

#include "vfpt/errors.hpp"
#include "vfpt/metrics.hpp"
#include "vfpt/random.hpp"

using namespace vfpt;
namespace fs = std::filesystem;

TEST(Iou, HandCases) {
  const ImageBox a{0, 0, 10, 10};
  EXPECT_EQ(iou(a, a), 1.0);
  EXPECT_EQ(iou(a, {20, 20, 5, 5}), 0.0);
  EXPECT_EQ(iou(a, {10, 0, 10, 10}), 0.0);
  EXPECT_NEAR(iou(a, {5, 0, 10, 10}), 1.0 / 3.0, 1e-15);
  EXPECT_EQ(iou(a, {0, 0, 0, 5}), 0.0);
}

TEST(Iou, SymmetricAndBounded) {
  Rng rng(1);
  for (int k = 0; k < 500; ++k) {
    const ImageBox a{rng.uniform(0, 50), rng.uniform(0, 50), rng.uniform(1, 30), rng.uniform(1, 30)};
    const ImageBox b{rng.uniform(0, 50), rng.uniform(0, 50), rng.uniform(1, 30), rng.uniform(1, 30)};
    EXPECT_EQ(iou(a, b), iou(b, a));
    EXPECT_GE(iou(a, b), 0.0);
    EXPECT_LE(iou(a, b), 1.0);
  }
}

TEST(Evaluate, GroundTruthAsPredictionsScoresOne) {
  const std::vector<ImageBox> gt{{1, 2, 10, 12}, {3, 4, 11, 9}, {5, 5, 8, 8}};
  const SequenceReport r = evaluate(gt, gt);
  EXPECT_EQ(r.sr, 1.0);
  EXPECT_EQ(r.pr, 1.0);
  EXPECT_EQ(r.npr, 1.0);
  EXPECT_EQ(r.success.back(), 1.0);
}

TEST(Evaluate, FarPredictionsScoreZero) {
  const std::vector<ImageBox> gt{{0, 0, 10, 10}, {0, 0, 10, 10}};
  const std::vector<ImageBox> pred{{200, 200, 10, 10}, {300, 0, 10, 10}};
  const SequenceReport r = evaluate(pred, gt);
  EXPECT_EQ(r.sr, 0.0);
  EXPECT_EQ(r.pr, 0.0);
  EXPECT_EQ(r.npr, 0.0);
}

TEST(Evaluate, FiveFrameCaseMatchesBruteForce) {
  const ImageBox g{0, 0, 10, 10};
  const std::vector<ImageBox> gt(5, g);
  const std::vector<ImageBox> pred{{0, 0, 10, 10}, {5, 0, 10, 10}, {50, 0, 10, 10}, {0, 0, 10, 5}, {-5, -5, 10, 10}};
  const double ious[] = {1.0, 1.0 / 3.0, 0.0, 0.5, 25.0 / 175.0};
  const double errs[] = {0.0, 5.0, 50.0, 2.5, std::sqrt(50.0)};
  for (int t = 0; t < 5; ++t) {
    EXPECT_NEAR(iou(pred[t], g), ious[t], 1e-15);
    EXPECT_NEAR(center_error(pred[t], g), errs[t], 1e-12);
  }
  const SequenceReport r = evaluate(pred, gt);
  double sr = 0;
  const auto taus = success_thresholds();
  for (std::size_t k = 0; k < taus.size(); ++k) {
    double hits = 0;
    for (double v : ious) hits += taus[k] >= 1.0 ? v >= 1.0 : v > taus[k];
    EXPECT_DOUBLE_EQ(r.success[k], hits / 5.0) << taus[k];
    sr += hits / 5.0;
  }
  EXPECT_NEAR(r.sr, sr / taus.size(), 1e-15);
  double pr = 0;
  for (double e : errs) pr += e <= 20.0;
  EXPECT_DOUBLE_EQ(r.pr, pr / 5.0);
  double npr = 0;
  for (int t = 0; t < 5; ++t) npr += norm_center_error(pred[t], g) <= 0.2;
  EXPECT_DOUBLE_EQ(r.npr, npr / 5.0);
}

TEST(Evaluate, CurvesAreMonotone) {
  Rng rng(2);
  std::vector<ImageBox> gt, pred;
  for (int t = 0; t < 40; ++t) {
    gt.push_back({rng.uniform(0, 100), rng.uniform(0, 100), rng.uniform(5, 30), rng.uniform(5, 30)});
    pred.push_back({gt.back().x + rng.normal(0, 8), gt.back().y + rng.normal(0, 8), gt.back().w, gt.back().h});
  }
  const SequenceReport r = evaluate(pred, gt);
  for (std::size_t k = 1; k < r.success.size(); ++k) EXPECT_LE(r.success[k], r.success[k - 1]);
  for (std::size_t k = 1; k < r.precision.size(); ++k) EXPECT_GE(r.precision[k], r.precision[k - 1]);
  for (std::size_t k = 1; k < r.norm_precision.size(); ++k) EXPECT_GE(r.norm_precision[k], r.norm_precision[k - 1]);
  EXPECT_EQ(r.success.size(), 21u);
  EXPECT_EQ(r.precision.size(), 51u);
  EXPECT_EQ(r.norm_precision.size(), 51u);
}

TEST(Evaluate, NormalisedPrecisionIsScaleInvariant) {
  Rng rng(3);
  std::vector<ImageBox> gt, pred, gt3, pred3;
  for (int t = 0; t < 30; ++t) {
    gt.push_back({rng.uniform(0, 100), rng.uniform(0, 100), rng.uniform(5, 30), rng.uniform(5, 30)});
    pred.push_back({gt.back().x + rng.normal(0, 3), gt.back().y + rng.normal(0, 3), rng.uniform(5, 30), 10});
    auto s = [](const ImageBox& b) { return ImageBox{3 * b.x, 3 * b.y, 3 * b.w, 3 * b.h}; };
    gt3.push_back(s(gt.back()));
    pred3.push_back(s(pred.back()));
  }
  EXPECT_EQ(evaluate(pred, gt).npr, evaluate(pred3, gt3).npr);
  EXPECT_EQ(evaluate(pred, gt).sr, evaluate(pred3, gt3).sr);
}

TEST(Evaluate, LengthMismatchThrows) {
  EXPECT_THROW(evaluate({{0, 0, 1, 1}}, {}), DimensionError);
}

TEST(Aggregate, FrameWeighted) {
  const ImageBox g{0, 0, 10, 10};
  const SequenceReport a = evaluate({g, g, g}, {g, g, g}, "a");
  const SequenceReport b = evaluate({{90, 90, 10, 10}}, {g}, "b");
  const EvalReport rep = aggregate({a, b});
  EXPECT_EQ(rep.overall.frames, 4u);
  EXPECT_DOUBLE_EQ(rep.overall.sr, 0.75);
  EXPECT_DOUBLE_EQ(rep.overall.pr, 0.75);
  EXPECT_EQ(rep.sequences.size(), 2u);
}

TEST(Aggregate, SingleSequenceCopiedExactly) {
  Rng rng(4);
  std::vector<ImageBox> gt, pred;
  for (int t = 0; t < 7; ++t) {
    gt.push_back({rng.uniform(0, 100), rng.uniform(0, 100), 12, 12});
    pred.push_back({gt.back().x + rng.normal(0, 4), gt.back().y, 12, 12});
  }
  const SequenceReport r = evaluate(pred, gt, "only");
  const EvalReport rep = aggregate({r});
  EXPECT_EQ(rep.overall.sr, r.sr);
  EXPECT_EQ(rep.overall.success, r.success);
  EXPECT_EQ(rep.overall.name, "overall");
}

TEST(Report, WritesSummaryAndCurves) {
  const fs::path dir = fs::temp_directory_path() / "vfpt_metrics";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const ImageBox g{0, 0, 10, 10};
  write_report(aggregate({evaluate({g}, {g}, "s1")}), dir / "eval.txt", "# hdr\n");
  std::ifstream in(dir / "eval.txt");
  std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  EXPECT_EQ(all.rfind("# hdr\n", 0), 0u);
  EXPECT_NE(all.find("sr = 1"), std::string::npos);
  EXPECT_NE(all.find("sequence.s1.frames = 1"), std::string::npos);
  for (const char* f : {"eval_success.csv", "eval_precision.csv", "eval_norm_precision.csv"}) {
    std::ifstream c(dir / f);
    std::size_t rows = 0;
    std::string line;
    std::getline(c, line);
    EXPECT_EQ(line, "threshold,value");
    while (std::getline(c, line)) ++rows;
    EXPECT_EQ(rows, std::string(f) == "eval_success.csv" ? 21u : 51u) << f;
  }
}
