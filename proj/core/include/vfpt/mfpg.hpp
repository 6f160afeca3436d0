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

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "vfpt/autograd.hpp"
#include "vfpt/config.hpp"
#include "vfpt/tensor.hpp"

namespace vfpt {

// One modality-fusion prompt generator: linear D -> D/beta, sum of the two
// modalities, 3x3 conv D/beta -> D on each segment's grid, layer norm.
struct MfpgLayerParams {
  Param proj_w;  // [D, D/beta]
  Param proj_b;  // [D/beta]
  // Present only when the two modalities use separate projections.
  std::optional<std::pair<Param, Param>> proj_tir;
  Param conv_w;  // [D, D/beta, 3, 3]
  Param conv_b;  // [D]
  Param norm_g;  // [D]
  Param norm_b;  // [D]

  std::vector<Param*> params();
};

struct MfpgParams {
  std::map<std::size_t, MfpgLayerParams> layers;  // keyed by 1-based layer

  MfpgLayerParams* at(std::size_t layer);
  std::vector<Param*> params();
  std::vector<const Param*> params() const;
};

// Projection and conv are randomly initialised; the norm gain and shift start
// at zero so a fresh generator emits P = 0 and leaves both streams unchanged.
MfpgParams init_mfpg(const MfpgConfig& cfg, const EncoderConfig& enc, std::uint64_t seed);

// D*(D/beta) + D/beta + D*(D/beta)*9 + D + 2D.
std::size_t mfpg_layer_budget(std::size_t dim, std::size_t beta);

// P for image tokens f_rgb, f_tir of shape [N_z + N_x, D]. Template and search
// segments are convolved on separate grids with the same kernel.
Var mfpg_forward(Tape& tape, Var f_rgb, Var f_tir, MfpgLayerParams& params, const TokenLayout& layout,
                 double ln_eps);

// F' = F + P for both modalities.
std::pair<Var, Var> inject_residual(Var f_rgb, Var f_tir, Var prompt);

}  // namespace vfpt
