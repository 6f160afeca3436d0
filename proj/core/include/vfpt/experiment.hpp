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

#include <filesystem>
#include <string>
#include <vector>

#include "vfpt/config.hpp"
#include "vfpt/metrics.hpp"
#include "vfpt/model.hpp"
#include "vfpt/synth.hpp"
#include "vfpt/tracker.hpp"

namespace vfpt {

// Tracks every sequence and aggregates the per-sequence reports.
EvalReport evaluate_model(Model& model, const std::vector<Sequence>& data, ModalityMask mask = ModalityMask::kBoth);

enum class SweepAxis { kAlpha, kMfpgLayers, kPromptLayers, kFftMode };

std::string to_string(SweepAxis axis);
SweepAxis parse_sweep_axis(const std::string& s);

struct SweepPoint {
  std::string value;
  Config config;
};

// alpha: 0, 0.1, ..., 1. Layer axes: first half, second half, all layers.
// fft-mode: channel, spatial, both. Every point keeps the base seed.
std::vector<SweepPoint> sweep_points(SweepAxis axis, const Config& base);

struct SweepRow {
  std::string value;
  double sr = 0.0;
  double pr = 0.0;
  double npr = 0.0;
};

// Trains on `data` for each grid point and evaluates on the same sequences.
std::vector<SweepRow> run_sweep(SweepAxis axis, const Config& base, const std::vector<Sequence>& data);

// value,SR,PR,NPR
void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows);

}  // namespace vfpt
