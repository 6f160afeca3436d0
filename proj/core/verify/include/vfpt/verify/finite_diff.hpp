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
#include <functional>
#include <string>
#include <vector>

#include "vfpt/autograd.hpp"
#include "vfpt/tensor.hpp"

namespace vfpt::verify {

struct GradCheck {
  std::string name;
  std::size_t checked = 0;   // scalars compared
  double max_abs_err = 0.0;  // max |analytic - numeric|
  double max_abs_fd = 0.0;   // max |numeric|
  // max_abs_err / max(max_abs_fd, 1e-8)
  double rel_err() const;
};

// Builds an op output from differentiable inputs on a fresh tape.
using OpFn = std::function<Var(Tape&, const std::vector<Var>&)>;

// Contracts the op output with a fixed random tensor to a scalar, then
// compares the taped gradient of every input element (or `max_per_input`
// random ones) with central differences of step h.
GradCheck check_op(const std::string& name, const OpFn& op, std::vector<Tensor> inputs, std::uint64_t seed,
                   double h = 1e-6, std::size_t max_per_input = 0);

// Same contraction for an output built from Params: compares the gradients
// accumulated into the Params with central differences on up to
// `max_total` randomly chosen scalars across all of them (0: every scalar).
GradCheck check_params(const std::string& name, const std::function<Var(Tape&)>& build,
                       const std::vector<Param*>& params, std::uint64_t seed, double h = 1e-6,
                       std::size_t max_total = 0);

// Central difference of a scalar function of one parameter element.
double central_difference(const std::function<double()>& f, double& x, double h);

}  // namespace vfpt::verify
