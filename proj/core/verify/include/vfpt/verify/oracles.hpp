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

#include "vfpt/config.hpp"
#include "vfpt/encoder.hpp"
#include "vfpt/mfpg.hpp"
#include "vfpt/tensor.hpp"

// Straight-loop reference implementations. None of these call into the
// taped ops or the FFT; they exist to be compared against them.
namespace vfpt::verify {

// Re of the 2D DFT over (tokens, channels) by direct quadruple loop.
Tensor dft2_real_reference(const Tensor& t);

Tensor matmul_reference(const Tensor& a, const Tensor& b);
Tensor layer_norm_reference(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps);
// 3x3, zero padding 1. x[c, h, w], w[o, c, 3, 3].
Tensor conv3x3_reference(const Tensor& x, const Tensor& w, const Tensor& b);
// Multi-head self attention on x[L, D] with packed projections.
Tensor attention_reference(const Tensor& x, const Tensor& qkv_w, const Tensor& qkv_b, std::size_t heads);
Tensor vit_block_reference(const Tensor& x, const BlockParams& p, std::size_t heads, double eps);

// Plain single-stream ViT over [template; search] tokens, no prompts.
Tensor single_stream_reference(const Tensor& template_img, const Tensor& search_img, const EncoderParams& enc,
                               const EncoderConfig& cfg);

// MFPG output P for image tokens [N_z + N_x, D].
Tensor mfpg_reference(const Tensor& f_rgb, const Tensor& f_tir, const MfpgLayerParams& p, const TokenLayout& layout,
                      double eps);

}  // namespace vfpt::verify
