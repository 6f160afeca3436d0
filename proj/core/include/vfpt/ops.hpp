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
#include <span>

#include "vfpt/autograd.hpp"
#include "vfpt/tensor.hpp"

// Differentiable primitives. Every op computes its forward value eagerly and
// records an analytic backward closure on the operands' tape. No implicit
// broadcasting except the bias in linear/conv2d.
namespace vfpt::ops {

Var add(Var a, Var b);
Var scale(Var a, double s);
Var sum(Var x);

// y = x W + b for x[n, d_in], W[d_in, d_out], b[d_out]. `b` may be an
// invalid Var for no bias.
Var linear(Var x, Var w, Var b);

// Per-row normalisation of x[n, d] followed by gamma/beta affine.
Var layer_norm(Var x, Var gamma, Var beta, double eps);

Var gelu(Var x);
Var sigmoid(Var x);
Var softmax(Var x, std::size_t axis);

// 3x3 cross-correlation with zero padding 1: x[c_in, h, w],
// W[c_out, c_in, 3, 3], b[c_out] -> [c_out, h, w].
Var conv2d(Var x, Var w, Var b);

// Scaled dot-product self attention over packed qkv[L, 3D] with `heads`
// heads of width D/heads. Returns the concatenated head outputs [L, D].
Var attention(Var qkv, std::size_t heads);

Var slice_rows(Var x, std::size_t start, std::size_t count);
Var concat_rows(std::span<const Var> parts);

// [h*w, D] token sequence (row-major grid order) <-> [D, h, w] feature map.
Var tokens_to_grid(Var x, std::size_t h, std::size_t w);
Var grid_to_tokens(Var x);

// Column means of x[n, d] -> [1, d].
Var mean_rows(Var x);

// gate * a + (1 - gate) * b with a single-element gate.
Var blend(Var gate, Var a, Var b);

// Channel vector x[:, i, j] of a [c, h, w] map -> [c].
Var select_cell(Var x, std::size_t i, std::size_t j);

}  // namespace vfpt::ops

// Plain forward kernels shared by ops and by callers that need no tape.
namespace vfpt::kernels {

// C[n, m] = A[n, k] * B[k, m]
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor softmax(const Tensor& x, std::size_t axis);
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps);
double gelu(double x);
double gelu_grad(double x);
double sigmoid(double x);

}  // namespace vfpt::kernels
