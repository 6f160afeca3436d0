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

#include "vfpt/verify/finite_diff.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vfpt/random.hpp"

namespace vfpt::verify {

double GradCheck::rel_err() const { return max_abs_err / std::max(max_abs_fd, 1e-8); }

double central_difference(const std::function<double()>& f, double& x, double h) {
  const double saved = x;
  x = saved + h;
  const double up = f();
  x = saved - h;
  const double down = f();
  x = saved;
  return (up - down) / (2.0 * h);
}

namespace {

// sum(r * y) as a taped scalar.
Var contract(Var y, const Tensor& r) {
  double s = 0.0;
  for (std::size_t k = 0; k < r.size(); ++k) s += r[k] * y.value()[k];
  return y.tape().record(Tensor::scalar(s), y.requires_grad(), [y, r](const Tensor& g) {
    Tensor& gy = y.tape().grad_slot(y);
    for (std::size_t k = 0; k < r.size(); ++k) gy[k] += g[0] * r[k];
  });
}

}  // namespace

GradCheck check_op(const std::string& name, const OpFn& op, std::vector<Tensor> inputs, std::uint64_t seed,
                   double h, std::size_t max_per_input) {
  Rng rng(seed);
  Tensor r;
  auto evaluate = [&](bool with_grad, std::vector<Tensor>* grads) {
    Tape tape;
    std::vector<Var> vars;
    for (const Tensor& t : inputs) vars.push_back(tape.variable(t));
    Var y = op(tape, vars);
    if (r.empty()) {
      r = Tensor(y.value().shape());
      rng.fill_uniform(r, -1.0, 1.0);
    }
    Var s = contract(y, r);
    if (with_grad) {
      tape.backward(s);
      for (Var v : vars) {
        const Tensor& g = tape.grad(v);
        grads->push_back(g.empty() ? Tensor(v.value().shape()) : g);
      }
    }
    return s.value()[0];
  };
  std::vector<Tensor> analytic;
  evaluate(true, &analytic);

  GradCheck out;
  out.name = name;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    std::vector<std::size_t> idx(inputs[i].size());
    std::iota(idx.begin(), idx.end(), 0);
    if (max_per_input > 0 && idx.size() > max_per_input) {
      std::shuffle(idx.begin(), idx.end(), rng.engine());
      idx.resize(max_per_input);
    }
    for (std::size_t k : idx) {
      const double fd = central_difference([&] { return evaluate(false, nullptr); }, inputs[i][k], h);
      out.max_abs_err = std::max(out.max_abs_err, std::abs(fd - analytic[i][k]));
      out.max_abs_fd = std::max(out.max_abs_fd, std::abs(fd));
      ++out.checked;
    }
  }
  return out;
}

GradCheck check_params(const std::string& name, const std::function<Var(Tape&)>& build,
                       const std::vector<Param*>& params, std::uint64_t seed, double h, std::size_t max_total) {
  Rng rng(seed);
  Tensor r;
  auto evaluate = [&](bool with_grad) {
    Tape tape;
    Var y = build(tape);
    if (r.empty()) {
      r = Tensor(y.value().shape());
      rng.fill_uniform(r, -1.0, 1.0);
    }
    Var s = contract(y, r);
    if (with_grad) tape.backward(s);
    return s.value()[0];
  };
  for (Param* p : params) p->zero_grad();
  evaluate(true);
  std::vector<Tensor> analytic;
  for (Param* p : params) analytic.push_back(p->grad);

  std::vector<std::pair<std::size_t, std::size_t>> picks;
  for (std::size_t i = 0; i < params.size(); ++i)
    for (std::size_t k = 0; k < params[i]->size(); ++k) picks.emplace_back(i, k);
  if (max_total > 0 && picks.size() > max_total) {
    std::shuffle(picks.begin(), picks.end(), rng.engine());
    picks.resize(max_total);
  }
  GradCheck out;
  out.name = name;
  for (const auto& [i, k] : picks) {
    const double fd = central_difference([&] { return evaluate(false); }, params[i]->value[k], h);
    out.max_abs_err = std::max(out.max_abs_err, std::abs(fd - analytic[i][k]));
    out.max_abs_fd = std::max(out.max_abs_fd, std::abs(fd));
    ++out.checked;
  }
  return out;
}

}  // namespace vfpt::verify
