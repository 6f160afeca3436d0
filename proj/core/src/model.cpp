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

#include "vfpt/model.hpp"

#include "vfpt/random.hpp"

namespace vfpt {

Model Model::create(const Config& config) {
  config.validate();
  const EncoderConfig& ec = config.encoder;
  Model m;
  m.config = config;
  m.encoder = init_encoder(ec, derive_seed(config.seed, "init.encoder"));
  m.prompts = init_prompts(config.prompt, ec.dim, ec.layers, derive_seed(config.seed, "init.prompts"));
  m.mfpg = init_mfpg(config.mfpg, ec, derive_seed(config.seed, "init.mfpg"));
  m.head = init_head(ec.dim, derive_seed(config.seed, "init.head"));
  return m;
}

std::vector<Param*> Model::params() {
  std::vector<Param*> out = encoder.params();
  for (Param* p : prompts.params()) out.push_back(p);
  for (Param* p : mfpg.params()) out.push_back(p);
  for (Param* p : head.params()) out.push_back(p);
  return out;
}

std::vector<const Param*> Model::params() const {
  std::vector<const Param*> out;
  for (Param* p : const_cast<Model*>(this)->params()) out.push_back(p);
  return out;
}

Param* Model::find(const std::string& name) {
  for (Param* p : params())
    if (p->name == name) return p;
  return nullptr;
}

ForwardResult forward(Tape& tape, Model& model, const DualInputs& inputs) {
  ForwardResult r;
  r.encoder = forward_dual(tape, inputs, model.config, model.encoder, model.prompts, model.mfpg);
  const TokenLayout layout = model.config.encoder.layout(model.prompts.count);
  r.fused = fuse_and_reshape(r.encoder.rgb, r.encoder.tir, layout);
  r.head = head_forward(tape, r.fused, model.head);
  return r;
}

HeadOutputs predict(Model& model, const DualInputs& inputs) {
  Tape tape;
  return forward(tape, model, inputs).head.values();
}

}  // namespace vfpt
