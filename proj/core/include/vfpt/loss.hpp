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
#include <utility>

#include "vfpt/autograd.hpp"
#include "vfpt/config.hpp"
#include "vfpt/geometry.hpp"
#include "vfpt/head.hpp"
#include "vfpt/tensor.hpp"

namespace vfpt {

inline constexpr double kLogClamp = 1e-12;

// Grid cell (row, col) holding the box centre, clamped to the grid.
std::pair<std::size_t, std::size_t> center_cell(const BBox& gt, std::size_t hs, std::size_t ws);

// exp(-d^2 / (2 sigma^2)) around the centre cell, d in cells,
// sigma = max(1, (w Ws + h Hs) / 12). Exactly 1 at the centre cell.
Tensor gaussian_target(const BBox& gt, std::size_t hs, std::size_t ws);

// Penalty-reduced focal loss, normalised by the number of cells with
// target == 1 (at least one).
double focal_loss(const Tensor& score, const Tensor& target);

double giou(const BBox& a, const BBox& b);
double giou_loss(const BBox& pred, const BBox& gt);
// Mean absolute difference of (cx, cy, w, h).
double l1_loss(const BBox& pred, const BBox& gt);

// Box decoded at a fixed cell rather than at the argmax.
BBox cell_box(const HeadOutputs& out, std::size_t i, std::size_t j);

struct LossValues {
  double total = 0.0;
  double cls = 0.0;
  double giou = 0.0;
  double l1 = 0.0;
};

LossValues total_loss(const HeadOutputs& out, const BBox& gt, const LossWeights& w);

namespace ops {

// score [1, Hs, Ws] or [Hs, Ws].
Var focal_loss(Var score, const Tensor& target);
// offset and size [2, Hs, Ws] -> (cx, cy, w, h) of cell (i, j) as a [4] vector.
Var cell_box(Var offset, Var size, std::size_t i, std::size_t j);
Var giou_loss(Var box, const BBox& gt);
Var l1_loss(Var box, const BBox& gt);

}  // namespace ops

struct LossVars {
  Var total, cls, giou, l1;

  LossValues values() const;
};

LossVars total_loss(const HeadVars& out, const BBox& gt, const LossWeights& w);

}  // namespace vfpt
