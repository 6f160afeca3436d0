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

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "vfpt/autograd.hpp"
#include "vfpt/config.hpp"
#include "vfpt/mfpg.hpp"
#include "vfpt/prompts.hpp"
#include "vfpt/tensor.hpp"

namespace vfpt {

// Pre-norm transformer block weights.
struct BlockParams {
  Param ln1_g, ln1_b;
  Param qkv_w, qkv_b;    // [D, 3D], [3D]
  Param proj_w, proj_b;  // [D, D], [D]
  Param ln2_g, ln2_b;
  Param fc1_w, fc1_b;  // [D, rD], [rD]
  Param fc2_w, fc2_b;  // [rD, D], [D]

  std::vector<Param*> params();
};

// Frozen backbone shared by both modality streams.
struct EncoderParams {
  Param patch_w;       // [3 P^2, D]
  Param patch_b;       // [D]
  Param pos_template;  // [N_z, D]
  Param pos_search;    // [N_x, D]
  std::vector<BlockParams> blocks;

  std::vector<Param*> params();
  std::vector<const Param*> params() const;
};

// Seeded random weights, all marked frozen.
EncoderParams init_encoder(const EncoderConfig& cfg, std::uint64_t seed);

enum class Segment { kTemplate, kSearch };

// img[3, H, W] -> [(H/P)(W/P), 3 P^2], patches in row-major grid order,
// each flattened channel-major.
Tensor patchify(const Tensor& img, std::size_t patch);

// Linear projection of non-overlapping patches plus the segment's learned
// positional embedding.
Tensor patch_embed(const Tensor& img, const EncoderParams& params, const EncoderConfig& cfg, Segment segment);

// x + MHSA(LN(x)), then + MLP(LN(.)).
Var vit_block(Tape& tape, Var x, const BlockParams& params, std::size_t heads, double ln_eps);

// Model-ready crops, each [3, S, S] (TIR already replicated to 3 channels).
struct DualInputs {
  Tensor rgb_template;
  Tensor rgb_search;
  Tensor tir_template;
  Tensor tir_search;
};

struct DualOutput {
  Var rgb;  // final [N_z + N_x, D] features
  Var tir;
  // prompt_outputs[l-1][modality]: block output at the prompt slots of layer
  // l. Invalid where layer l carries no prompts.
  std::vector<std::array<Var, 2>> prompt_outputs;
  // Number of tokens entering each layer's block.
  std::vector<std::size_t> tokens_per_layer;
};

// Deep prompting across both streams: prompts are rebuilt at every carrying
// layer (layer 1 from T_init, later layers through the cross-modal update of
// the opposite stream's previous prompt outputs), concatenated as
// [prompts; template; search], run through the shared frozen block, split off,
// then MFPG fuses the image tokens where enabled.
DualOutput forward_dual(Tape& tape, const DualInputs& inputs, const Config& cfg, const EncoderParams& encoder,
                        PromptSet& prompts, MfpgParams& mfpg);

}  // namespace vfpt
