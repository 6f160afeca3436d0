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
#include <map>
#include <optional>
#include <vector>

#include "vfpt/autograd.hpp"
#include "vfpt/config.hpp"
#include "vfpt/tensor.hpp"

namespace vfpt {

enum class Modality : std::size_t { kRgb = 0, kTir = 1 };

inline Modality opposite(Modality m) { return m == Modality::kRgb ? Modality::kTir : Modality::kRgb; }
inline std::size_t index_of(Modality m) { return static_cast<std::size_t>(m); }
const char* to_string(Modality m);

// Learnable linear map applied to the opposite modality's previous-layer
// prompt outputs.
struct CrossModalTransform {
  Param weight;  // [D, D]
  Param bias;    // [D]
};

// Scene-adaptive blend weight for the Fourier rows.
struct AlphaGate {
  Param weight;  // [D, 1]
  Param bias;    // [1]
};

// Per-modality, per-layer prompt parameters. Layer keys are 1-based. With a
// shared transform, the single cross-modal map per modality is stored under
// key 0.
struct PromptSet {
  std::size_t dim = 0;
  std::size_t count = 0;
  std::array<std::map<std::size_t, Param>, 2> init;
  std::array<std::map<std::size_t, CrossModalTransform>, 2> transform;
  std::array<std::optional<AlphaGate>, 2> gate;

  bool carries(std::size_t layer) const { return init[0].count(layer) > 0; }
  const Param& initial(Modality m, std::size_t layer) const;
  Param& initial(Modality m, std::size_t layer);
  CrossModalTransform* transform_for(Modality m, std::size_t layer);

  // Every parameter, in a stable order.
  std::vector<Param*> params();
  std::vector<const Param*> params() const;
};

// Prompts ~ U(-0.5/sqrt(D), 0.5/sqrt(D)); cross-modal maps and gates start
// at zero, so until training moves them every layer sees its own T_init.
PromptSet init_prompts(const PromptConfig& cfg, std::size_t dim, std::size_t layers, std::uint64_t seed);

// Closed-form trainable count:
// 2|L|MD + 2|L ∩ {2..N}|(D^2 + D) (+ 2(D + 1) with adaptive alpha).
std::size_t prompt_param_budget(const PromptConfig& cfg, std::size_t dim, std::size_t layers);

// Rows [0, m) go through the Fourier map (blended with the spatial rows by
// the gate when adaptive alpha is on); rows [m, M) pass through untouched.
// `context` ([n, D] image tokens of this modality) feeds the adaptive gate
// and is ignored otherwise.
Var assemble_prompt_tokens(Tape& tape, PromptSet& set, const PromptConfig& cfg, Modality modality,
                           std::size_t layer, Var current, Var context = {});

// T_init[own][layer] + F[own][layer](other_prev). Only valid for layer >= 2;
// layer 1 uses T_init directly.
Var update_prompts(Tape& tape, PromptSet& set, std::size_t layer, Modality own, Var other_prev);

}  // namespace vfpt
