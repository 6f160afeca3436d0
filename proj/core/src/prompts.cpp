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

#include "vfpt/prompts.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "vfpt/fourier.hpp"
#include "vfpt/ops.hpp"
#include "vfpt/random.hpp"

namespace vfpt {

const char* to_string(Modality m) { return m == Modality::kRgb ? "rgb" : "tir"; }

const Param& PromptSet::initial(Modality m, std::size_t layer) const {
  const auto& layers = init[index_of(m)];
  const auto it = layers.find(layer);
  if (it == layers.end()) throw ProtocolError("layer " + std::to_string(layer) + " carries no prompts");
  return it->second;
}

Param& PromptSet::initial(Modality m, std::size_t layer) {
  return const_cast<Param&>(std::as_const(*this).initial(m, layer));
}

CrossModalTransform* PromptSet::transform_for(Modality m, std::size_t layer) {
  auto& maps = transform[index_of(m)];
  if (auto it = maps.find(layer); it != maps.end()) return &it->second;
  if (auto it = maps.find(0); it != maps.end()) return &it->second;
  return nullptr;
}

std::vector<Param*> PromptSet::params() {
  std::vector<Param*> out;
  for (std::size_t r = 0; r < 2; ++r) {
    for (auto& [layer, p] : init[r]) out.push_back(&p);
    for (auto& [layer, f] : transform[r]) {
      out.push_back(&f.weight);
      out.push_back(&f.bias);
    }
    if (gate[r]) {
      out.push_back(&gate[r]->weight);
      out.push_back(&gate[r]->bias);
    }
  }
  return out;
}

std::vector<const Param*> PromptSet::params() const {
  std::vector<const Param*> out;
  for (Param* p : const_cast<PromptSet*>(this)->params()) out.push_back(p);
  return out;
}

PromptSet init_prompts(const PromptConfig& cfg, std::size_t dim, std::size_t layers, std::uint64_t seed) {
  if (dim == 0 || layers == 0) throw ConfigError("init_prompts needs D >= 1 and N >= 1");
  cfg.validate(layers);
  PromptSet set;
  set.dim = dim;
  set.count = cfg.count;
  if (cfg.count == 0) return set;
  Rng rng(seed);
  const double bound = 0.5 / std::sqrt(static_cast<double>(dim));
  const auto carried = cfg.layers.resolve(layers);
  bool any_deep = false;
  for (std::size_t r = 0; r < 2; ++r) {
    const std::string prefix = std::string("prompt.") + to_string(static_cast<Modality>(r));
    for (std::size_t l : carried) {
      Tensor t({cfg.count, dim});
      rng.fill_uniform(t, -bound, bound);
      set.init[r].emplace(l, Param(prefix + ".l" + std::to_string(l) + ".init", std::move(t), true));
      if (l >= 2) {
        any_deep = true;
        if (!cfg.shared_transform) {
          const std::string base = prefix + ".l" + std::to_string(l) + ".transform";
          set.transform[r].emplace(
              l, CrossModalTransform{Param(base + ".weight", Tensor({dim, dim}), true),
                                     Param(base + ".bias", Tensor({dim}), true)});
        }
      }
    }
    if (cfg.shared_transform && any_deep) {
      const std::string base = prefix + ".shared.transform";
      set.transform[r].emplace(0, CrossModalTransform{Param(base + ".weight", Tensor({dim, dim}), true),
                                                      Param(base + ".bias", Tensor({dim}), true)});
    }
    if (cfg.adaptive_alpha) {
      set.gate[r] = AlphaGate{Param(prefix + ".gate.weight", Tensor({dim, 1}), true),
                              Param(prefix + ".gate.bias", Tensor({1}), true)};
    }
  }
  return set;
}

std::size_t prompt_param_budget(const PromptConfig& cfg, std::size_t dim, std::size_t layers) {
  if (cfg.count == 0) return 0;
  const auto carried = cfg.layers.resolve(layers);
  std::size_t deep = 0;
  for (std::size_t l : carried)
    if (l >= 2) ++deep;
  const std::size_t maps = cfg.shared_transform ? (deep > 0 ? 1 : 0) : deep;
  std::size_t total = 2 * carried.size() * cfg.count * dim + 2 * maps * (dim * dim + dim);
  if (cfg.adaptive_alpha) total += 2 * (dim + 1);
  return total;
}

Var assemble_prompt_tokens(Tape& tape, PromptSet& set, const PromptConfig& cfg, Modality modality,
                           std::size_t /*layer*/, Var current, Var context) {
  const std::size_t rows = current.value().dim(0);
  if (current.value().rank() != 2 || rows != set.count || current.value().dim(1) != set.dim) {
    throw DimensionError("prompt tokens must be " + shape_str({set.count, set.dim}) + ", got " +
                         shape_str(current.shape()));
  }
  const std::size_t m = cfg.fourier_count();
  if (!cfg.fourier_enabled || m == 0) return current;

  Var spatial = m == rows ? current : ops::slice_rows(current, 0, m);
  Var spectral = fourier_prompt_op(spatial, cfg.fft_mode, cfg.fft_output);
  if (cfg.adaptive_alpha) {
    auto& gate = set.gate[index_of(modality)];
    if (!gate) throw ProtocolError("adaptive alpha enabled but no gate parameters present");
    Var pooled = ops::mean_rows(context.valid() ? context : current);
    Var g = ops::sigmoid(ops::linear(pooled, tape.leaf(gate->weight), tape.leaf(gate->bias)));
    spectral = ops::blend(g, spectral, spatial);
  }
  if (m == rows) return spectral;
  const Var parts[] = {spectral, ops::slice_rows(current, m, rows - m)};
  return ops::concat_rows(parts);
}

Var update_prompts(Tape& tape, PromptSet& set, std::size_t layer, Modality own, Var other_prev) {
  if (layer < 2) throw ProtocolError("cross-modal prompt update starts at layer 2, got layer " + std::to_string(layer));
  CrossModalTransform* f = set.transform_for(own, layer);
  if (f == nullptr) {
    throw ProtocolError("no cross-modal transform for " + std::string(to_string(own)) + " layer " +
                        std::to_string(layer));
  }
  Param& init = set.initial(own, layer);
  Var residual = ops::linear(other_prev, tape.leaf(f->weight), tape.leaf(f->bias));
  return ops::add(tape.leaf(init), residual);
}

}  // namespace vfpt
