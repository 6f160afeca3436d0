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
#include <functional>
#include <vector>

#include "vfpt/tensor.hpp"

namespace vfpt {

class Tape;

// Handle to a value recorded on a Tape. Cheap to copy; only valid while the
// owning tape is alive.
class Var {
 public:
  Var() = default;

  bool valid() const { return tape_ != nullptr; }
  Tape& tape() const { return *tape_; }
  std::size_t id() const { return id_; }

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  bool requires_grad() const;

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Records forward values together with analytic backward closures.
// Gradients are only materialised for nodes that require them; frozen
// parameters enter as non-differentiable leaves, so no gradient is ever
// computed for them, while gradients still flow through the ops that use them.
class Tape {
 public:
  // Receives the gradient of the recorded node's output.
  using BackwardFn = std::function<void(const Tensor& out_grad)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  // Differentiable leaf not bound to a Param (tests, finite differences).
  Var variable(Tensor value);
  // Leaf bound to a Param. Differentiable iff the Param is trainable.
  Var leaf(Param& param);

  // Records an op output. `backward` is only invoked if any input requires grad.
  Var record(Tensor value, bool requires_grad, BackwardFn backward);

  const Tensor& value(Var v) const { return nodes_[v.id_].value; }
  bool requires_grad(Var v) const { return nodes_[v.id_].requires_grad; }

  // Gradient accumulated so far; empty tensor if none reached this node.
  const Tensor& grad(Var v) const { return nodes_[v.id_].grad; }
  // Adds `g` into the gradient slot of `v` (no-op when v needs no gradient).
  void accumulate(Var v, const Tensor& g);
  // Mutable gradient slot, zero-initialised on first access.
  Tensor& grad_slot(Var v);

  // Seeds d(root)/d(root) = 1 (root must hold one element), runs all backward
  // closures in reverse recording order, then adds leaf gradients into their
  // bound Params.
  void backward(Var root);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    Param* param = nullptr;
    BackwardFn backward;
  };

  std::vector<Node> nodes_;
};

inline const Tensor& Var::value() const { return tape_->value(*this); }
inline bool Var::requires_grad() const { return tape_->requires_grad(*this); }

}  // namespace vfpt
