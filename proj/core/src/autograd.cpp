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

#include "vfpt/autograd.hpp"

namespace vfpt {

Var Tape::constant(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, false, nullptr, {}});
  return Var(this, nodes_.size() - 1);
}

Var Tape::variable(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, true, nullptr, {}});
  return Var(this, nodes_.size() - 1);
}

Var Tape::leaf(Param& param) {
  nodes_.push_back(Node{param.value, {}, param.trainable, param.trainable ? &param : nullptr, {}});
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, bool requires_grad, BackwardFn backward) {
  nodes_.push_back(
      Node{std::move(value), {}, requires_grad, nullptr, requires_grad ? std::move(backward) : BackwardFn{}});
  return Var(this, nodes_.size() - 1);
}

Tensor& Tape::grad_slot(Var v) {
  Node& n = nodes_[v.id_];
  if (n.grad.empty()) n.grad = Tensor(n.value.shape());
  return n.grad;
}

void Tape::accumulate(Var v, const Tensor& g) {
  if (!nodes_[v.id_].requires_grad) return;
  grad_slot(v) += g;
}

void Tape::backward(Var root) {
  if (root.tape_ != this) throw ProtocolError("backward root belongs to another tape");
  if (value(root).size() != 1) {
    throw DimensionError("backward root must be a single element, got " + shape_str(value(root).shape()));
  }
  if (!requires_grad(root)) return;
  grad_slot(root).fill(1.0);
  for (std::size_t i = root.id_ + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.grad.empty() || !n.backward) continue;
    // Closures only write to earlier nodes, so n.grad stays put.
    n.backward(n.grad);
  }
  for (Node& n : nodes_) {
    if (n.param != nullptr && !n.grad.empty()) n.param->grad += n.grad;
  }
}

}  // namespace vfpt
