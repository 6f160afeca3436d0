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
#include <string>
#include <vector>

#include "vfpt/config.hpp"
#include "vfpt/encoder.hpp"
#include "vfpt/model.hpp"
#include "vfpt/random.hpp"
#include "vfpt/synth.hpp"
#include "vfpt/verify/finite_diff.hpp"

namespace vfpt::verify {

struct CheckResult {
  std::string suite;
  std::string name;
  bool passed = false;
  std::string detail;
};

struct SuiteOptions {
  std::size_t seeds = 20;
  // Added to every non-trivial FFT twiddle in the fft suite (sensitivity fixture).
  double fft_twiddle_error = 0.0;
};

// fft, grad, freeze, mfpg, metrics.
std::vector<std::string> suite_names();

// "all" runs every suite in order. Unknown names raise ConfigError.
std::vector<CheckResult> run_suite(const std::string& name, const SuiteOptions& options = {});

// --- fixtures shared with the tests ---

// Desk config with an adaptive gate so every trainable path is exercised.
Config gradient_config();

// Short synthetic sequence with every event type.
SyntheticSpec toy_spec(std::uint64_t seed, std::size_t length = 30);

DualInputs random_inputs(const EncoderConfig& cfg, Rng& rng);

// Refills all-zero trainable tensors with U(-scale, scale) so that
// zero-initialised paths carry gradient.
void randomize_trainable(Model& model, std::uint64_t seed, double scale = 0.2);

// Every differentiable op against central differences on small random inputs.
std::vector<GradCheck> op_gradient_checks(std::uint64_t seed);

// Full model and loss; `per_module` random scalars of each trainable group.
std::vector<GradCheck> model_gradient_checks(std::uint64_t seed, std::size_t per_module = 5);

inline constexpr double kOpGradTolerance = 1e-4;
inline constexpr double kModelGradTolerance = 1e-3;

}  // namespace vfpt::verify
