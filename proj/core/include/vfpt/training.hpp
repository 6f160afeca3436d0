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
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "vfpt/config.hpp"
#include "vfpt/encoder.hpp"
#include "vfpt/loss.hpp"
#include "vfpt/model.hpp"
#include "vfpt/random.hpp"
#include "vfpt/synth.hpp"

namespace vfpt {

struct Partition {
  std::vector<Param*> frozen;
  std::vector<Param*> trainable;
};

// Encoder parameters are frozen; prompts, cross-modal maps, gates, MFPG and
// head are trainable. Throws AuditError if a parameter is flagged against
// its group or a name appears twice.
Partition partition_params(Model& model);

// SHA-256 (hex) over names, shapes and payloads of the frozen parameters.
std::string frozen_digest(Model& model);

// Decoupled weight decay then bias-corrected Adam step.
class AdamW {
 public:
  AdamW(const OptimConfig& cfg, std::vector<Param*> params);

  // Learning rate used for 0-based step `step`.
  double lr_at(std::size_t step) const;
  // First step using the reduced rate: ceil(lr_drop_at * steps).
  std::size_t drop_step() const;

  // Consumes the grads of the bound params; throws NumericalError on
  // non-finite gradients before touching anything.
  void step();

  std::size_t steps_taken() const { return t_; }
  const std::vector<Param*>& params() const { return params_; }
  const std::vector<Tensor>& first_moments() const { return m_; }
  const std::vector<Tensor>& second_moments() const { return v_; }
  void restore(std::size_t steps_taken, std::vector<Tensor> m, std::vector<Tensor> v);

 private:
  OptimConfig cfg_;
  std::vector<Param*> params_;
  std::vector<Tensor> m_, v_;
  std::size_t t_ = 0;
};

struct TrainingSample {
  DualInputs inputs;
  BBox gt;  // normalised in the search crop
  std::size_t sequence = 0;
  std::size_t template_frame = 0;
  std::size_t search_frame = 0;
};

// Template around the gt of frame t, search around a jittered gt of frame
// t + k, k uniform in 1..max_gap (clipped to the sequence).
TrainingSample sample_pair(const std::vector<Sequence>& data, const Config& cfg, Rng& rng);

struct LossRecord {
  std::size_t step = 0;
  double total = 0.0;
  double cls = 0.0;
  double giou = 0.0;
  double l1 = 0.0;
};

void write_loss_curve(const std::filesystem::path& path, const std::vector<LossRecord>& curve);

struct Checkpoint {
  Config config;
  std::uint64_t seed = 0;
  std::uint64_t step = 0;
  std::vector<std::pair<std::string, Tensor>> tensors;  // params then optimizer moments

  std::string serialize() const;
  static Checkpoint deserialize(const std::string& bytes, const std::string& source = "<checkpoint>");
  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);
};

class Trainer {
 public:
  // Validates config and data before any step.
  Trainer(const Config& cfg, std::vector<Sequence> data);
  // Resumes model and optimizer state.
  Trainer(const Checkpoint& ckpt, std::vector<Sequence> data);
  // The optimizer points into the model.
  Trainer(const Trainer&) = delete;
  Trainer& operator=(const Trainer&) = delete;

  LossRecord step();
  // Runs the remaining configured steps.
  std::vector<LossRecord> run();

  Model& model() { return model_; }
  AdamW& optimizer() { return optim_; }
  const std::vector<LossRecord>& curve() const { return curve_; }
  Checkpoint checkpoint();

 private:
  void check_data() const;

  Model model_;
  std::vector<Sequence> data_;
  Partition partition_;
  AdamW optim_;
  Rng rng_;
  std::vector<LossRecord> curve_;
};

// Model with every parameter overwritten from the checkpoint.
Model model_from_checkpoint(const Checkpoint& ckpt);

}  // namespace vfpt
