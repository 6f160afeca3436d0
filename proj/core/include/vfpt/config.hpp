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
#include <set>
#include <string>

#include "vfpt/fourier.hpp"

namespace vfpt {

// A subset of the 1-based encoder layer indices. "all" tracks the layer count
// so that changing encoder.layers keeps meaning "every layer".
struct LayerSelection {
  bool all = true;
  std::set<std::size_t> explicit_layers;

  static LayerSelection every() { return {}; }
  static LayerSelection none() { return {false, {}}; }
  static LayerSelection range(std::size_t first, std::size_t last);

  bool contains(std::size_t layer) const { return all || explicit_layers.count(layer) > 0; }
  std::set<std::size_t> resolve(std::size_t layer_count) const;

  // "all", "none", or comma-separated indices and closed ranges ("1-3,6").
  static LayerSelection parse(const std::string& text);
  std::string to_string() const;

  friend bool operator==(const LayerSelection&, const LayerSelection&) = default;
};

// Offsets of the [prompt | template | search] segments of a layer input.
struct TokenLayout {
  std::size_t prompts = 0;
  std::size_t template_tokens = 0;
  std::size_t search_tokens = 0;
  std::size_t template_grid = 0;  // tokens per side
  std::size_t search_grid = 0;

  std::size_t template_offset() const { return prompts; }
  std::size_t search_offset() const { return prompts + template_tokens; }
  std::size_t total() const { return prompts + template_tokens + search_tokens; }
  std::size_t image_tokens() const { return template_tokens + search_tokens; }
};

struct EncoderConfig {
  std::size_t layers = 4;
  std::size_t dim = 64;
  std::size_t heads = 4;
  std::size_t mlp_ratio = 4;
  std::size_t patch = 8;
  std::size_t template_size = 32;  // square, pixels
  std::size_t search_size = 64;
  double ln_eps = 1e-6;

  std::size_t template_grid() const { return template_size / patch; }
  std::size_t search_grid() const { return search_size / patch; }
  std::size_t template_tokens() const { return template_grid() * template_grid(); }
  std::size_t search_tokens() const { return search_grid() * search_grid(); }
  TokenLayout layout(std::size_t prompt_count) const;
  void validate() const;

  friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

struct PromptConfig {
  std::size_t count = 8;  // M, prompts per layer and modality
  double alpha = 0.2;     // fraction of the M prompts taking the Fourier path
  LayerSelection layers = LayerSelection::every();
  FftMode fft_mode = FftMode::kBoth;
  FftOutput fft_output = FftOutput::kReal;
  bool adaptive_alpha = false;
  bool fourier_enabled = true;
  bool shared_transform = false;  // one cross-modal map per modality for all layers

  // m = round(alpha * M), halves rounded up.
  std::size_t fourier_count() const;
  void validate(std::size_t layer_count) const;

  friend bool operator==(const PromptConfig&, const PromptConfig&) = default;
};

struct MfpgConfig {
  LayerSelection layers = LayerSelection::every();
  std::size_t beta = 8;  // channel reduction D -> D / beta
  bool shared_projection = true;

  friend bool operator==(const MfpgConfig&, const MfpgConfig&) = default;
};

struct LossWeights {
  double lambda_giou = 2.0;
  double lambda_l1 = 5.0;

  friend bool operator==(const LossWeights&, const LossWeights&) = default;
};

struct OptimConfig {
  double lr = 4e-4;
  double weight_decay = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double lr_drop_at = 0.75;  // fraction of total steps
  double lr_drop_factor = 0.1;
  std::size_t steps = 300;

  friend bool operator==(const OptimConfig&, const OptimConfig&) = default;
};

struct TrainConfig {
  std::size_t max_gap = 10;      // search frame drawn from t+1 .. t+max_gap
  double center_jitter = 0.5;    // search centre shift, in units of sqrt(w*h)
  double scale_jitter = 0.15;    // relative search side perturbation
  std::size_t log_every = 0;     // 0: silent

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct TrackConfig {
  double gamma = 0.49;  // Hann window weight
  double template_factor = 2.0;
  double search_factor = 4.0;

  friend bool operator==(const TrackConfig&, const TrackConfig&) = default;
};

struct Config {
  std::uint64_t seed = 1;
  EncoderConfig encoder;
  PromptConfig prompt;
  MfpgConfig mfpg;
  LossWeights loss;
  OptimConfig optim;
  TrainConfig train;
  TrackConfig track;

  // Small CPU-friendly defaults.
  static Config desk();
  // Dimensions of a ViT-B/16 backbone with 128/256 crops.
  static Config full_scale();

  void validate() const;

  // Line-oriented "section.key = value" text; round-trips through parse.
  std::string to_text() const;
  // Starts from desk() and applies the given keys. Unknown keys and bad
  // values raise ConfigError naming the key and source.
  static Config parse(const std::string& text, const std::string& source = "<config>");
  static Config load(const std::filesystem::path& path);

  friend bool operator==(const Config&, const Config&) = default;
};

}  // namespace vfpt
