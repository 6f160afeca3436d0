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
#include <vector>

#include "vfpt/autograd.hpp"
#include "vfpt/config.hpp"
#include "vfpt/geometry.hpp"
#include "vfpt/tensor.hpp"

namespace vfpt {

struct ConvLayer {
  Param weight;  // [out, in, 3, 3]
  Param bias;    // [out]
};

// conv D->D/2, GELU, conv D/2->D/4, GELU, conv D/4->out, logistic.
struct HeadBranch {
  ConvLayer conv1, conv2, conv3;
};

struct HeadParams {
  HeadBranch score;   // 1 output channel
  HeadBranch offset;  // 2: x, y within the cell
  HeadBranch size;    // 2: w, h relative to the search region

  std::vector<Param*> params();
  std::vector<const Param*> params() const;
};

HeadParams init_head(std::size_t dim, std::uint64_t seed);
std::size_t head_param_budget(std::size_t dim);

// Plain head output. score [Hs, Ws], offset and size [2, Hs, Ws].
struct HeadOutputs {
  Tensor score;
  Tensor offset;
  Tensor size;
};

// Taped head output; score is [1, Hs, Ws].
struct HeadVars {
  Var score;
  Var offset;
  Var size;

  HeadOutputs values() const;
};

// Adds the search segments of the two final image-token streams
// ([N_z + N_x, D], no prompt rows) and lays them out as [D, Hs, Ws].
Var fuse_and_reshape(Var f_rgb, Var f_tir, const TokenLayout& layout);

HeadVars head_forward(Tape& tape, Var x, HeadParams& params);

// Peak of the score map (ties to the smallest row-major index) plus its
// offset and size.
BBox decode_box(const HeadOutputs& out);

}  // namespace vfpt
