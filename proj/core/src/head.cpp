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

#include "vfpt/head.hpp"

#include <cmath>
#include <string>

#include "vfpt/ops.hpp"
#include "vfpt/random.hpp"

namespace vfpt {

namespace {

ConvLayer make_conv(Rng& rng, const std::string& name, std::size_t in, std::size_t out) {
  Tensor w({out, in, 3, 3});
  const double bound = 1.0 / std::sqrt(static_cast<double>(9 * in));
  rng.fill_uniform(w, -bound, bound);
  return {Param(name + ".weight", std::move(w), true), Param(name + ".bias", Tensor({out}), true)};
}

HeadBranch make_branch(Rng& rng, const std::string& name, std::size_t dim, std::size_t out) {
  return {make_conv(rng, name + ".conv1", dim, dim / 2), make_conv(rng, name + ".conv2", dim / 2, dim / 4),
          make_conv(rng, name + ".conv3", dim / 4, out)};
}

std::size_t branch_budget(std::size_t d, std::size_t out) {
  return 9 * d * (d / 2) + d / 2 + 9 * (d / 2) * (d / 4) + d / 4 + 9 * (d / 4) * out + out;
}

Var run_branch(Tape& tape, Var x, HeadBranch& b) {
  auto conv = [&tape](Var in, ConvLayer& c) { return ops::conv2d(in, tape.leaf(c.weight), tape.leaf(c.bias)); };
  Var h = ops::gelu(conv(x, b.conv1));
  h = ops::gelu(conv(h, b.conv2));
  return ops::sigmoid(conv(h, b.conv3));
}

}  // namespace

std::vector<Param*> HeadParams::params() {
  std::vector<Param*> out;
  for (HeadBranch* b : {&score, &offset, &size})
    for (ConvLayer* c : {&b->conv1, &b->conv2, &b->conv3}) {
      out.push_back(&c->weight);
      out.push_back(&c->bias);
    }
  return out;
}

std::vector<const Param*> HeadParams::params() const {
  std::vector<const Param*> out;
  for (Param* p : const_cast<HeadParams*>(this)->params()) out.push_back(p);
  return out;
}

HeadParams init_head(std::size_t dim, std::uint64_t seed) {
  if (dim < 4 || dim % 4 != 0) throw ConfigError("head needs D divisible by 4, got " + std::to_string(dim));
  Rng rng(seed);
  HeadParams h;
  h.score = make_branch(rng, "head.score", dim, 1);
  h.offset = make_branch(rng, "head.offset", dim, 2);
  h.size = make_branch(rng, "head.size", dim, 2);
  return h;
}

std::size_t head_param_budget(std::size_t dim) {
  return branch_budget(dim, 1) + 2 * branch_budget(dim, 2);
}

HeadOutputs HeadVars::values() const {
  const Tensor& s = score.value();
  return {s.reshaped({s.dim(1), s.dim(2)}), offset.value(), size.value()};
}

Var fuse_and_reshape(Var f_rgb, Var f_tir, const TokenLayout& layout) {
  require_same_shape(f_rgb.value(), f_tir.value(), "fuse_and_reshape");
  if (f_rgb.value().dim(0) != layout.image_tokens()) {
    throw DimensionError("fuse_and_reshape expects " + std::to_string(layout.image_tokens()) +
                         " image tokens, got " + shape_str(f_rgb.shape()));
  }
  Var xr = ops::slice_rows(f_rgb, layout.template_tokens, layout.search_tokens);
  Var xt = ops::slice_rows(f_tir, layout.template_tokens, layout.search_tokens);
  return ops::tokens_to_grid(ops::add(xr, xt), layout.search_grid, layout.search_grid);
}

HeadVars head_forward(Tape& tape, Var x, HeadParams& params) {
  if (x.value().rank() != 3) throw DimensionError("head expects [D, Hs, Ws], got " + shape_str(x.shape()));
  return {run_branch(tape, x, params.score), run_branch(tape, x, params.offset), run_branch(tape, x, params.size)};
}

BBox decode_box(const HeadOutputs& out) {
  const Tensor& s = out.score;
  if (s.rank() != 2) throw DimensionError("score map must be [Hs, Ws], got " + shape_str(s.shape()));
  const std::size_t hs = s.dim(0), ws = s.dim(1);
  require_shape(out.offset, {2, hs, ws}, "offset map");
  require_shape(out.size, {2, hs, ws}, "size map");
  std::size_t best = 0;
  for (std::size_t k = 1; k < s.size(); ++k)
    if (s[k] > s[best]) best = k;
  const std::size_t i = best / ws, j = best % ws;
  return {(static_cast<double>(j) + out.offset.at(0, i, j)) / static_cast<double>(ws),
          (static_cast<double>(i) + out.offset.at(1, i, j)) / static_cast<double>(hs), out.size.at(0, i, j),
          out.size.at(1, i, j)};
}

}  // namespace vfpt
