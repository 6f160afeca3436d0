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

#include <cstdint>
#include <random>
#include <string_view>

#include "vfpt/tensor.hpp"

namespace vfpt {

// Seed for a named sub-stream of a master seed, so that e.g. "init.encoder"
// draws the same values regardless of what other streams consume.
std::uint64_t derive_seed(std::uint64_t master, std::string_view stream);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t master, std::string_view stream) : engine_(derive_seed(master, stream)) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  double normal(double mean, double stddev) {
    return std::normal_distribution<double>(mean, stddev)(engine_);
  }
  // Inclusive on both ends.
  int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }

  void fill_uniform(Tensor& t, double lo, double hi) {
    for (double& v : t.data()) v = uniform(lo, hi);
  }
  void fill_normal(Tensor& t, double stddev) {
    for (double& v : t.data()) v = normal(0.0, stddev);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace vfpt
