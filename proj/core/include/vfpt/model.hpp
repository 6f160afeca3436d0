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

#include <string>
#include <vector>

#include "vfpt/autograd.hpp"
#include "vfpt/config.hpp"
#include "vfpt/encoder.hpp"
#include "vfpt/head.hpp"
#include "vfpt/mfpg.hpp"
#include "vfpt/prompts.hpp"

namespace vfpt {

// The full tracker network: frozen encoder plus every trainable part.
struct Model {
  Config config;
  EncoderParams encoder;
  PromptSet prompts;
  MfpgParams mfpg;
  HeadParams head;

  // Fresh model. Each part draws from its own sub-stream of config.seed.
  static Model create(const Config& config);

  // Encoder, prompts, MFPG, head; stable order.
  std::vector<Param*> params();
  std::vector<const Param*> params() const;
  Param* find(const std::string& name);
};

struct ForwardResult {
  DualOutput encoder;
  Var fused;  // [D, Hs, Ws]
  HeadVars head;
};

ForwardResult forward(Tape& tape, Model& model, const DualInputs& inputs);

// Forward pass on a throwaway tape.
HeadOutputs predict(Model& model, const DualInputs& inputs);

}  // namespace vfpt
