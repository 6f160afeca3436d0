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

#include "vfpt/encoder.hpp"

#include <cmath>
#include <string>

#include "vfpt/ops.hpp"
#include "vfpt/random.hpp"

namespace vfpt {

std::vector<Param*> BlockParams::params() {
  return {&ln1_g, &ln1_b, &qkv_w, &qkv_b, &proj_w, &proj_b, &ln2_g, &ln2_b, &fc1_w, &fc1_b, &fc2_w, &fc2_b};
}

std::vector<Param*> EncoderParams::params() {
  std::vector<Param*> out{&patch_w, &patch_b, &pos_template, &pos_search};
  for (auto& b : blocks)
    for (Param* p : b.params()) out.push_back(p);
  return out;
}

std::vector<const Param*> EncoderParams::params() const {
  std::vector<const Param*> out;
  for (Param* p : const_cast<EncoderParams*>(this)->params()) out.push_back(p);
  return out;
}

namespace {

Param frozen_normal(Rng& rng, std::string name, Shape shape, double stddev) {
  Tensor t(std::move(shape));
  rng.fill_normal(t, stddev);
  return Param(std::move(name), std::move(t), false);
}

Param frozen_const(std::string name, Shape shape, double v) {
  return Param(std::move(name), Tensor(std::move(shape), v), false);
}

}  // namespace

EncoderParams init_encoder(const EncoderConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed);
  const std::size_t d = cfg.dim, hidden = cfg.mlp_ratio * cfg.dim, patch_dim = 3 * cfg.patch * cfg.patch;
  const double sd = 1.0 / std::sqrt(static_cast<double>(d));
  EncoderParams e;
  e.patch_w = frozen_normal(rng, "encoder.patch.weight", {patch_dim, d}, 1.0 / std::sqrt(static_cast<double>(patch_dim)));
  e.patch_b = frozen_const("encoder.patch.bias", {d}, 0.0);
  e.pos_template = frozen_normal(rng, "encoder.pos_template", {cfg.template_tokens(), d}, 0.1);
  e.pos_search = frozen_normal(rng, "encoder.pos_search", {cfg.search_tokens(), d}, 0.1);
  for (std::size_t l = 1; l <= cfg.layers; ++l) {
    const std::string p = "encoder.l" + std::to_string(l) + ".";
    BlockParams b{frozen_const(p + "ln1.weight", {d}, 1.0),
                  frozen_const(p + "ln1.bias", {d}, 0.0),
                  frozen_normal(rng, p + "qkv.weight", {d, 3 * d}, sd),
                  frozen_const(p + "qkv.bias", {3 * d}, 0.0),
                  frozen_normal(rng, p + "proj.weight", {d, d}, 0.5 * sd),
                  frozen_const(p + "proj.bias", {d}, 0.0),
                  frozen_const(p + "ln2.weight", {d}, 1.0),
                  frozen_const(p + "ln2.bias", {d}, 0.0),
                  frozen_normal(rng, p + "fc1.weight", {d, hidden}, sd),
                  frozen_const(p + "fc1.bias", {hidden}, 0.0),
                  frozen_normal(rng, p + "fc2.weight", {hidden, d}, 0.5 / std::sqrt(static_cast<double>(hidden))),
                  frozen_const(p + "fc2.bias", {d}, 0.0)};
    e.blocks.push_back(std::move(b));
  }
  return e;
}

Tensor patchify(const Tensor& img, std::size_t patch) {
  if (img.rank() != 3 || img.dim(0) != 3) {
    throw DimensionError("patchify expects a [3, H, W] image, got " + shape_str(img.shape()));
  }
  const std::size_t h = img.dim(1), w = img.dim(2);
  if (patch == 0 || h % patch != 0 || w % patch != 0) {
    throw ConfigError("image " + std::to_string(h) + "x" + std::to_string(w) + " is not divisible by patch size " +
                      std::to_string(patch));
  }
  const std::size_t gh = h / patch, gw = w / patch, pd = 3 * patch * patch;
  Tensor out({gh * gw, pd});
  for (std::size_t gy = 0; gy < gh; ++gy) {
    for (std::size_t gx = 0; gx < gw; ++gx) {
      double* row = out.ptr() + (gy * gw + gx) * pd;
      std::size_t k = 0;
      for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t py = 0; py < patch; ++py)
          for (std::size_t px = 0; px < patch; ++px) row[k++] = img.at(c, gy * patch + py, gx * patch + px);
    }
  }
  return out;
}

Tensor patch_embed(const Tensor& img, const EncoderParams& params, const EncoderConfig& cfg, Segment segment) {
  const std::size_t expected = segment == Segment::kTemplate ? cfg.template_size : cfg.search_size;
  if (img.rank() != 3 || img.dim(1) != expected || img.dim(2) != expected) {
    throw ConfigError(std::string(segment == Segment::kTemplate ? "template" : "search") + " image must be [3, " +
                      std::to_string(expected) + ", " + std::to_string(expected) + "], got " +
                      shape_str(img.shape()));
  }
  Tensor tokens = kernels::matmul(patchify(img, cfg.patch), params.patch_w.value);
  const Tensor& pos = segment == Segment::kTemplate ? params.pos_template.value : params.pos_search.value;
  require_shape(pos, tokens.shape(), "positional embedding");
  const std::size_t d = cfg.dim;
  for (std::size_t i = 0; i < tokens.dim(0); ++i)
    for (std::size_t j = 0; j < d; ++j) tokens.at(i, j) += params.patch_b.value[j] + pos.at(i, j);
  return tokens;
}

Var vit_block(Tape& tape, Var x, const BlockParams& p, std::size_t heads, double ln_eps) {
  auto c = [&tape](const Param& q) { return tape.constant(q.value); };
  Var h = ops::layer_norm(x, c(p.ln1_g), c(p.ln1_b), ln_eps);
  Var attn = ops::attention(ops::linear(h, c(p.qkv_w), c(p.qkv_b)), heads);
  Var x1 = ops::add(x, ops::linear(attn, c(p.proj_w), c(p.proj_b)));
  Var h2 = ops::layer_norm(x1, c(p.ln2_g), c(p.ln2_b), ln_eps);
  Var mlp = ops::linear(ops::gelu(ops::linear(h2, c(p.fc1_w), c(p.fc1_b))), c(p.fc2_w), c(p.fc2_b));
  return ops::add(x1, mlp);
}

namespace {

Tensor stack_rows(const Tensor& a, const Tensor& b) {
  Tensor out({a.dim(0) + b.dim(0), a.dim(1)});
  std::copy(a.data().begin(), a.data().end(), out.ptr());
  std::copy(b.data().begin(), b.data().end(), out.ptr() + a.size());
  return out;
}

}  // namespace

DualOutput forward_dual(Tape& tape, const DualInputs& in, const Config& cfg, const EncoderParams& encoder,
                        PromptSet& prompts, MfpgParams& mfpg) {
  const EncoderConfig& ec = cfg.encoder;
  if (encoder.blocks.size() != ec.layers) {
    throw ConfigError("encoder has " + std::to_string(encoder.blocks.size()) + " blocks, config says " +
                      std::to_string(ec.layers));
  }
  const std::size_t m = prompts.count;
  const TokenLayout layout = ec.layout(m);

  std::array<Var, 2> feat = {
      tape.constant(stack_rows(patch_embed(in.rgb_template, encoder, ec, Segment::kTemplate),
                               patch_embed(in.rgb_search, encoder, ec, Segment::kSearch))),
      tape.constant(stack_rows(patch_embed(in.tir_template, encoder, ec, Segment::kTemplate),
                               patch_embed(in.tir_search, encoder, ec, Segment::kSearch)))};

  DualOutput out;
  out.prompt_outputs.resize(ec.layers);
  for (std::size_t l = 1; l <= ec.layers; ++l) {
    const bool carries = m > 0 && prompts.carries(l);
    std::array<Var, 2> seq = feat;
    if (carries) {
      std::array<Var, 2> tokens;
      for (std::size_t r = 0; r < 2; ++r) {
        const Modality own = static_cast<Modality>(r);
        const Var other_prev = l >= 2 ? out.prompt_outputs[l - 2][index_of(opposite(own))] : Var{};
        Var t = other_prev.valid() ? update_prompts(tape, prompts, l, own, other_prev)
                                   : tape.leaf(prompts.initial(own, l));
        tokens[r] = assemble_prompt_tokens(tape, prompts, cfg.prompt, own, l, t, feat[r]);
      }
      for (std::size_t r = 0; r < 2; ++r) {
        const Var parts[] = {tokens[r], feat[r]};
        seq[r] = ops::concat_rows(parts);
      }
    }
    out.tokens_per_layer.push_back(seq[0].value().dim(0));
    for (std::size_t r = 0; r < 2; ++r) {
      Var y = vit_block(tape, seq[r], encoder.blocks[l - 1], ec.heads, ec.ln_eps);
      if (carries) {
        out.prompt_outputs[l - 1][r] = ops::slice_rows(y, 0, m);
        feat[r] = ops::slice_rows(y, m, layout.image_tokens());
      } else {
        feat[r] = y;
      }
    }
    if (MfpgLayerParams* fuse = mfpg.at(l)) {
      Var p = mfpg_forward(tape, feat[0], feat[1], *fuse, layout, ec.ln_eps);
      std::tie(feat[0], feat[1]) = inject_residual(feat[0], feat[1], p);
    }
  }
  out.rgb = feat[0];
  out.tir = feat[1];
  return out;
}

}  // namespace vfpt
