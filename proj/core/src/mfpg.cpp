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

#include "vfpt/mfpg.hpp"

#include <cmath>
#include <string>

#include "vfpt/ops.hpp"
#include "vfpt/random.hpp"

namespace vfpt {

std::vector<Param*> MfpgLayerParams::params() {
  std::vector<Param*> out{&proj_w, &proj_b};
  if (proj_tir) {
    out.push_back(&proj_tir->first);
    out.push_back(&proj_tir->second);
  }
  out.insert(out.end(), {&conv_w, &conv_b, &norm_g, &norm_b});
  return out;
}

MfpgLayerParams* MfpgParams::at(std::size_t layer) {
  auto it = layers.find(layer);
  return it == layers.end() ? nullptr : &it->second;
}

std::vector<Param*> MfpgParams::params() {
  std::vector<Param*> out;
  for (auto& [l, p] : layers)
    for (Param* q : p.params()) out.push_back(q);
  return out;
}

std::vector<const Param*> MfpgParams::params() const {
  std::vector<const Param*> out;
  for (Param* p : const_cast<MfpgParams*>(this)->params()) out.push_back(p);
  return out;
}

MfpgParams init_mfpg(const MfpgConfig& cfg, const EncoderConfig& enc, std::uint64_t seed) {
  const std::size_t d = enc.dim;
  if (cfg.beta == 0 || d % cfg.beta != 0) {
    throw ConfigError("mfpg.beta (" + std::to_string(cfg.beta) + ") must divide D (" + std::to_string(d) + ")");
  }
  const std::size_t r = d / cfg.beta;
  Rng rng(seed);
  const double proj_bound = 1.0 / std::sqrt(static_cast<double>(d));
  const double conv_bound = 1.0 / std::sqrt(static_cast<double>(9 * r));
  MfpgParams out;
  for (std::size_t l : cfg.layers.resolve(enc.layers)) {
    const std::string p = "mfpg.l" + std::to_string(l) + ".";
    Tensor pw({d, r});
    rng.fill_uniform(pw, -proj_bound, proj_bound);
    MfpgLayerParams layer{Param(p + "proj.weight", std::move(pw), true),
                          Param(p + "proj.bias", Tensor({r}), true),
                          std::nullopt,
                          Param(p + "conv.weight", Tensor({d, r, 3, 3}), true),
                          Param(p + "conv.bias", Tensor({d}), true),
                          Param(p + "norm.weight", Tensor({d}), true),
                          Param(p + "norm.bias", Tensor({d}), true)};
    if (!cfg.shared_projection) {
      Tensor tw({d, r});
      rng.fill_uniform(tw, -proj_bound, proj_bound);
      layer.proj_tir.emplace(Param(p + "proj_tir.weight", std::move(tw), true),
                             Param(p + "proj_tir.bias", Tensor({r}), true));
    }
    rng.fill_uniform(layer.conv_w.value, -conv_bound, conv_bound);
    out.layers.emplace(l, std::move(layer));
  }
  return out;
}

std::size_t mfpg_layer_budget(std::size_t dim, std::size_t beta) {
  const std::size_t r = dim / beta;
  return dim * r + r + dim * r * 9 + dim + 2 * dim;
}

Var mfpg_forward(Tape& tape, Var f_rgb, Var f_tir, MfpgLayerParams& params, const TokenLayout& layout,
                 double ln_eps) {
  require_same_shape(f_rgb.value(), f_tir.value(), "mfpg_forward");
  if (f_rgb.value().rank() != 2 || f_rgb.value().dim(0) != layout.image_tokens()) {
    throw DimensionError("mfpg_forward expects [" + std::to_string(layout.image_tokens()) +
                         ", D] image tokens, got " + shape_str(f_rgb.shape()));
  }
  Var pr = ops::linear(f_rgb, tape.leaf(params.proj_w), tape.leaf(params.proj_b));
  Var pt = params.proj_tir
               ? ops::linear(f_tir, tape.leaf(params.proj_tir->first), tape.leaf(params.proj_tir->second))
               : ops::linear(f_tir, tape.leaf(params.proj_w), tape.leaf(params.proj_b));
  Var fused = ops::add(pr, pt);

  Var conv_w = tape.leaf(params.conv_w);
  Var conv_b = tape.leaf(params.conv_b);
  auto up = [&](std::size_t offset, std::size_t tokens, std::size_t grid) {
    Var seg = ops::slice_rows(fused, offset, tokens);
    return ops::grid_to_tokens(ops::conv2d(ops::tokens_to_grid(seg, grid, grid), conv_w, conv_b));
  };
  const Var parts[] = {up(0, layout.template_tokens, layout.template_grid),
                       up(layout.template_tokens, layout.search_tokens, layout.search_grid)};
  return ops::layer_norm(ops::concat_rows(parts), tape.leaf(params.norm_g), tape.leaf(params.norm_b), ln_eps);
}

std::pair<Var, Var> inject_residual(Var f_rgb, Var f_tir, Var prompt) {
  return {ops::add(f_rgb, prompt), ops::add(f_tir, prompt)};
}

}  // namespace vfpt
