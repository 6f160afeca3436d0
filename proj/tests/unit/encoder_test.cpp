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

#include <algorithm>

#include "vfpt/encoder.hpp"
#include "vfpt/errors.hpp"
#include "vfpt/loss.hpp"
#include "vfpt/model.hpp"
#include "vfpt/ops.hpp"
#include "vfpt/random.hpp"
#include "vfpt/verify/oracles.hpp"
#include "vfpt/verify/suites.hpp"

using namespace vfpt;

namespace {

Tensor rand_tensor(Rng& rng, Shape s, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(s));
  rng.fill_uniform(t, lo, hi);
  return t;
}

EncoderConfig tiny() {
  EncoderConfig e;
  e.layers = 2;
  e.dim = 16;
  e.heads = 2;
  e.mlp_ratio = 2;
  e.patch = 4;
  e.template_size = 8;
  e.search_size = 16;
  return e;
}

bool all_zero(const Tensor& t) {
  return std::all_of(t.data().begin(), t.data().end(), [](double v) { return v == 0.0; });
}

}  // namespace

TEST(Encoder, TokenCounts) {
  EncoderConfig full;
  full.patch = 16;
  full.template_size = 128;
  full.search_size = 256;
  EXPECT_EQ(full.template_tokens(), 64u);
  EXPECT_EQ(full.search_tokens(), 256u);
  const EncoderConfig desk;
  EXPECT_EQ(desk.template_tokens(), 16u);
}

TEST(Encoder, PatchEmbedShapeAndSizeCheck) {
  const EncoderConfig e = tiny();
  const EncoderParams p = init_encoder(e, 1);
  EXPECT_EQ(patch_embed(Tensor({3, 16, 16}), p, e, Segment::kSearch).shape(), (Shape{16, 16}));
  EXPECT_THROW(patch_embed(Tensor({3, 12, 12}), p, e, Segment::kSearch), ConfigError);
}

TEST(Encoder, ZeroedOutputProjectionsGiveIdentity) {
  const EncoderConfig e = tiny();
  EncoderParams p = init_encoder(e, 2);
  BlockParams& b = p.blocks[0];
  b.proj_w.value.fill(0.0);
  b.proj_b.value.fill(0.0);
  b.fc2_w.value.fill(0.0);
  b.fc2_b.value.fill(0.0);
  Rng rng(3);
  const Tensor x = rand_tensor(rng, {1, 16});
  Tape tape;
  EXPECT_EQ(vit_block(tape, tape.constant(x), b, e.heads, e.ln_eps).value(), x);
}

TEST(Encoder, BlockIsPermutationEquivariant) {
  const EncoderConfig e = tiny();
  const EncoderParams p = init_encoder(e, 4);
  Rng rng(5);
  const Tensor x = rand_tensor(rng, {5, 16});
  Tensor swapped = x;
  for (std::size_t j = 0; j < 16; ++j) std::swap(swapped.at(1, j), swapped.at(3, j));
  Tape tape;
  const Tensor y = vit_block(tape, tape.constant(x), p.blocks[0], e.heads, e.ln_eps).value();
  const Tensor ys = vit_block(tape, tape.constant(swapped), p.blocks[0], e.heads, e.ln_eps).value();
  for (std::size_t j = 0; j < 16; ++j) {
    EXPECT_NEAR(ys.at(1, j), y.at(3, j), 1e-13);
    EXPECT_NEAR(ys.at(3, j), y.at(1, j), 1e-13);
    EXPECT_NEAR(ys.at(0, j), y.at(0, j), 1e-13);
  }
}

TEST(Encoder, BlockMatchesLoopOracle) {
  const EncoderConfig e = tiny();
  EncoderParams p = init_encoder(e, 6);
  Rng rng(7);
  rng.fill_uniform(p.blocks[0].ln1_g.value, 0.5, 1.5);
  rng.fill_uniform(p.blocks[0].qkv_b.value, -0.3, 0.3);
  const Tensor x = rand_tensor(rng, {4, 16});
  Tape tape;
  const Tensor y = vit_block(tape, tape.constant(x), p.blocks[0], e.heads, e.ln_eps).value();
  EXPECT_LT(max_abs_diff(y, verify::vit_block_reference(x, p.blocks[0], e.heads, e.ln_eps)), 1e-10);
}

TEST(Encoder, NoPromptsNoFusionEqualsTwoSingleStreams) {
  Config cfg = Config::desk();
  cfg.prompt.count = 0;
  cfg.mfpg.layers = LayerSelection::none();
  Model model = Model::create(cfg);
  Rng rng(8);
  const DualInputs in = verify::random_inputs(cfg.encoder, rng);
  Tape tape;
  const DualOutput out = forward_dual(tape, in, cfg, model.encoder, model.prompts, model.mfpg);
  const Tensor rgb = verify::single_stream_reference(in.rgb_template, in.rgb_search, model.encoder, cfg.encoder);
  const Tensor tir = verify::single_stream_reference(in.tir_template, in.tir_search, model.encoder, cfg.encoder);
  EXPECT_LT(max_abs_diff(out.rgb.value(), rgb), 1e-12);
  EXPECT_LT(max_abs_diff(out.tir.value(), tir), 1e-12);
}

TEST(Encoder, IdenticalModalitiesGiveIdenticalStreams) {
  Config cfg = Config::desk();
  Model model = Model::create(cfg);
  for (auto& [layer, p] : model.prompts.init[1]) p.value = model.prompts.init[0].at(layer).value;
  Rng rng(9);
  DualInputs in = verify::random_inputs(cfg.encoder, rng);
  in.tir_template = in.rgb_template;
  in.tir_search = in.rgb_search;
  Tape tape;
  const DualOutput out = forward_dual(tape, in, cfg, model.encoder, model.prompts, model.mfpg);
  EXPECT_EQ(out.rgb.value(), out.tir.value());
}

TEST(Encoder, SwappingModalitiesSwapsStreams) {
  Config cfg = Config::desk();
  Model model = Model::create(cfg);
  verify::randomize_trainable(model, 10);
  Rng rng(11);
  const DualInputs in = verify::random_inputs(cfg.encoder, rng);
  Model swapped = model;
  std::swap(swapped.prompts.init[0], swapped.prompts.init[1]);
  std::swap(swapped.prompts.transform[0], swapped.prompts.transform[1]);
  const DualInputs sin{in.tir_template, in.tir_search, in.rgb_template, in.rgb_search};
  Tape tape;
  const DualOutput a = forward_dual(tape, in, cfg, model.encoder, model.prompts, model.mfpg);
  const DualOutput b = forward_dual(tape, sin, cfg, swapped.encoder, swapped.prompts, swapped.mfpg);
  EXPECT_EQ(a.rgb.value(), b.tir.value());
  EXPECT_EQ(a.tir.value(), b.rgb.value());
}

TEST(Encoder, EveryBlockSeesPromptsAndImageTokens) {
  Config cfg = Config::desk();
  Model model = Model::create(cfg);
  Rng rng(12);
  Tape tape;
  const DualOutput out =
      forward_dual(tape, verify::random_inputs(cfg.encoder, rng), cfg, model.encoder, model.prompts, model.mfpg);
  ASSERT_EQ(out.tokens_per_layer.size(), cfg.encoder.layers);
  for (std::size_t n : out.tokens_per_layer) {
    EXPECT_EQ(n, cfg.prompt.count + cfg.encoder.template_tokens() + cfg.encoder.search_tokens());
  }
  for (const auto& pair : out.prompt_outputs) {
    for (const Var& v : pair) EXPECT_EQ(v.value().shape(), (Shape{cfg.prompt.count, cfg.encoder.dim}));
  }
  EXPECT_EQ(out.rgb.value().shape(),
            (Shape{cfg.encoder.template_tokens() + cfg.encoder.search_tokens(), cfg.encoder.dim}));
}

TEST(Encoder, GradientReachesPromptsButNotFrozenWeights) {
  Config cfg = Config::desk();
  Model model = Model::create(cfg);
  verify::randomize_trainable(model, 13);
  Rng rng(14);
  const DualInputs in = verify::random_inputs(cfg.encoder, rng);
  for (Param* p : model.params()) p->zero_grad();
  Tape tape;
  const ForwardResult fr = forward(tape, model, in);
  tape.backward(total_loss(fr.head, BBox{0.4, 0.6, 0.2, 0.3}, cfg.loss).total);
  for (auto& [layer, p] : model.prompts.init[0]) EXPECT_FALSE(all_zero(p.grad)) << p.name;
  for (auto& [layer, p] : model.prompts.init[1]) EXPECT_FALSE(all_zero(p.grad)) << p.name;
  for (Param* p : model.mfpg.params()) EXPECT_FALSE(all_zero(p->grad)) << p->name;
  for (Param* p : model.encoder.params()) EXPECT_TRUE(p->grad.empty() || all_zero(p->grad)) << p->name;
}

TEST(Encoder, InitIsDeterministic) {
  const EncoderConfig e = tiny();
  const EncoderParams a = init_encoder(e, 15), b = init_encoder(e, 15);
  const auto pa = a.params(), pb = b.params();
  for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_EQ(pa[i]->value, pb[i]->value);
}
