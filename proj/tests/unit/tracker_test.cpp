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

#include "vfpt/errors.hpp"
#include "vfpt/head.hpp"
#include "vfpt/random.hpp"
#include "vfpt/tracker.hpp"
#include "vfpt/verify/suites.hpp"

using namespace vfpt;

namespace {

std::pair<std::size_t, std::size_t> argmax2(const Tensor& t) {
  std::size_t bi = 0, bj = 0;
  for (std::size_t i = 0; i < t.dim(0); ++i)
    for (std::size_t j = 0; j < t.dim(1); ++j)
      if (t.at(i, j) > t.at(bi, bj)) bi = i, bj = j;
  return {bi, bj};
}

void zero_branch_output(HeadBranch& b, double bias) {
  b.conv3.weight.value.fill(0.0);
  b.conv3.bias.value.fill(bias);
}

}  // namespace

TEST(Crop, TemplateIsCentredOnTarget) {
  const Config cfg = Config::desk();
  for (double cx : {60.5, 61.2, 20.0}) {
    Tensor rgb({3, 96, 128}), tir({1, 96, 128});
    const std::size_t px = static_cast<std::size_t>(cx), py = 40;
    for (std::size_t c = 0; c < 3; ++c) rgb.at(c, py, px) = 1.0;
    tir.at(0, py, px) = 1.0;
    const ImageBox gt{cx - 8.0, py + 0.5 - 8.0, 16.0, 16.0};
    const TrackState s = track_init(cfg, rgb, tir, gt);
    Tensor plane({s.template_rgb.dim(1), s.template_rgb.dim(2)});
    for (std::size_t i = 0; i < plane.dim(0); ++i)
      for (std::size_t j = 0; j < plane.dim(1); ++j) plane.at(i, j) = s.template_rgb.at(0, i, j);
    const auto [i, j] = argmax2(plane);
    const double half = 0.5 * static_cast<double>(cfg.encoder.template_size);
    EXPECT_LE(std::abs(j + 0.5 - half), 1.0) << cx;
    EXPECT_LE(std::abs(i + 0.5 - half), 1.0) << cx;
    EXPECT_EQ(s.template_tir.at(2, i, j), 1.0);
  }
}

TEST(Crop, IdenticalFramesGiveIdenticalTemplates) {
  const Sequence seq = generate(verify::toy_spec(2, 6));
  const Config cfg = Config::desk();
  const Frame& f = seq.frames[0];
  const TrackState a = track_init(cfg, f.rgb, f.tir, f.gt), b = track_init(cfg, f.rgb, f.tir, f.gt);
  EXPECT_EQ(a.template_rgb, b.template_rgb);
  EXPECT_EQ(a.template_tir, b.template_tir);
}

TEST(Crop, PaddedPixelCountMatchesIndependentLoop) {
  const Tensor img({1, 30, 40}, 0.5);
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const double cx = rng.uniform(-10, 50), cy = rng.uniform(-10, 40), side = rng.uniform(5, 60);
    const std::size_t out = 16;
    CropInfo info;
    crop_resize(img, cx, cy, side, out, &info);
    std::size_t padded = 0;
    for (std::size_t v = 0; v < out; ++v)
      for (std::size_t u = 0; u < out; ++u) {
        const double sx = cx - side / 2 + (u + 0.5) * side / out, sy = cy - side / 2 + (v + 0.5) * side / out;
        if (std::floor(sx) < 0 || std::floor(sx) >= 40 || std::floor(sy) < 0 || std::floor(sy) >= 30) ++padded;
      }
    EXPECT_EQ(info.padded_pixels, padded);
  }
}

TEST(Crop, MaskedModalityIsZeroed) {
  Tensor rgb({3, 20, 20}, 0.7), tir({1, 20, 20}, 0.3);
  const CropPair r = crop_pair(rgb, tir, 10, 10, 8, 4, ModalityMask::kRgbOnly);
  EXPECT_EQ(r.tir, Tensor({3, 4, 4}));
  EXPECT_EQ(r.rgb, Tensor({3, 4, 4}, 0.7));
  const CropPair t = crop_pair(rgb, tir, 10, 10, 8, 4, ModalityMask::kTirOnly);
  EXPECT_EQ(t.rgb, Tensor({3, 4, 4}));
  EXPECT_EQ(t.tir, Tensor({3, 4, 4}, 0.3));
  EXPECT_EQ(parse_modality_mask(to_string(ModalityMask::kTirOnly)), ModalityMask::kTirOnly);
  EXPECT_THROW(parse_modality_mask("ir"), ConfigError);
}

TEST(Hanning, ZeroGammaLeavesScore) {
  Rng rng(4);
  Tensor s({8, 8});
  rng.fill_uniform(s, 0, 1);
  EXPECT_EQ(hanning_penalty(s, 0.0), s);
}

TEST(Hanning, FullGammaPeaksAtCentre) {
  for (std::size_t n : {7u, 8u, 16u}) {
    Rng rng(n);
    Tensor s({n, n});
    rng.fill_uniform(s, 0, 1);
    const auto [i, j] = argmax2(hanning_penalty(s, 1.0));
    const std::size_t lo = n % 2 ? n / 2 : n / 2 - 1;
    EXPECT_TRUE(i == lo || i == n / 2) << n;
    EXPECT_TRUE(j == lo || j == n / 2) << n;
  }
}

TEST(Hanning, MatchesExhaustiveEvaluation) {
  Rng rng(5);
  Tensor s({8, 8});
  rng.fill_uniform(s, 0, 1);
  const double gamma = 0.49;
  const Tensor p = hanning_penalty(s, gamma);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 8; ++j) {
      const double hi = 0.5 * (1 - std::cos(2 * M_PI * (i + 1) / 9.0));
      const double hj = 0.5 * (1 - std::cos(2 * M_PI * (j + 1) / 9.0));
      EXPECT_NEAR(p.at(i, j), (1 - gamma) * s.at(i, j) + gamma * hi * hj, 1e-15);
    }
  EXPECT_THROW(hanning_penalty(s, 1.5), ConfigError);
}

TEST(Coordinates, RoundTrip) {
  Rng rng(6);
  for (int k = 0; k < 100; ++k) {
    const CropInfo crop{rng.uniform(-20, 50), rng.uniform(-20, 50), rng.uniform(10, 100), 0};
    const ImageBox b{rng.uniform(0, 80), rng.uniform(0, 80), rng.uniform(1, 30), rng.uniform(1, 30)};
    const ImageBox r = to_image(to_normalized(b, crop), crop);
    EXPECT_NEAR(r.x, b.x, 1e-12);
    EXPECT_NEAR(r.y, b.y, 1e-12);
    EXPECT_NEAR(r.w, b.w, 1e-12);
    EXPECT_NEAR(r.h, b.h, 1e-12);
  }
}

TEST(Coordinates, ClampKeepsBoxInsideImage) {
  const ImageBox a = clamp_to_image({-5, -5, 3, 3}, 20, 10);
  EXPECT_GE(a.x, 0.0);
  EXPECT_GE(a.w, 1.0);
  const ImageBox b = clamp_to_image({18, 8, 30, 30}, 20, 10);
  EXPECT_LE(b.x + b.w, 20.0);
  EXPECT_LE(b.y + b.h, 10.0);
  EXPECT_EQ(clamp_to_image({2, 3, 4, 5}, 20, 10), (ImageBox{2, 3, 4, 5}));
}

TEST(Tracker, RiggedHeadDecodesNearCentre) {
  Config cfg = Config::desk();
  Model model = Model::create(cfg);
  zero_branch_output(model.head.score, 0.0);
  zero_branch_output(model.head.offset, 0.0);
  const double size_logit = std::log(0.25 / 0.75);
  zero_branch_output(model.head.size, size_logit);
  const Sequence seq = generate(verify::toy_spec(7, 4));
  const Frame& f0 = seq.frames[0];
  TrackState s = track_init(cfg, f0.rgb, f0.tir, f0.gt);
  const double side = f0.gt.context_side(cfg.track.search_factor);
  const double cell = side / static_cast<double>(cfg.encoder.search_grid());
  const FrameResult r = track_frame(s, seq.frames[1].rgb, seq.frames[1].tir, model);
  EXPECT_LE(std::abs(r.box.cx() - f0.gt.cx()), cell);
  EXPECT_LE(std::abs(r.box.cy() - f0.gt.cy()), cell);
  EXPECT_NEAR(r.box.w, 0.25 * side, 1e-9);
  EXPECT_EQ(r.penalized_score.shape(), (Shape{cfg.encoder.search_grid(), cfg.encoder.search_grid()}));
}

TEST(Tracker, SequenceIsDeterministicAndInsideImage) {
  Config cfg = Config::desk();
  Model model = Model::create(cfg);
  verify::randomize_trainable(model, 9);
  const Sequence seq = generate(verify::toy_spec(8, 6));
  std::size_t sink_calls = 0;
  const auto a = track_sequence(seq, model, ModalityMask::kBoth, [&](std::size_t t, const Tensor&) {
    EXPECT_EQ(t, sink_calls + 1);
    ++sink_calls;
  });
  const auto b = track_sequence(seq, model);
  EXPECT_EQ(sink_calls, 5u);
  ASSERT_EQ(a.size(), 6u);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a[0], seq.frames[0].gt);
  for (const ImageBox& box : a) {
    EXPECT_GE(box.x, 0.0);
    EXPECT_GE(box.y, 0.0);
    EXPECT_LE(box.x + box.w, seq.spec.width + 1e-9);
    EXPECT_LE(box.y + box.h, seq.spec.height + 1e-9);
  }
}

TEST(Tracker, ProtocolChecks) {
  Model model = Model::create(Config::desk());
  TrackState empty;
  EXPECT_THROW(track_frame(empty, Tensor({3, 8, 8}), Tensor({1, 8, 8}), model), ProtocolError);
  EXPECT_THROW(track_init(Config::desk(), Tensor({3, 8, 8}), Tensor({1, 9, 8}), ImageBox{1, 1, 2, 2}),
               DimensionError);
  EXPECT_THROW(track_init(Config::desk(), Tensor({3, 8, 8}), Tensor({1, 8, 8}), ImageBox{1, 1, 0, 2}), ConfigError);
}
