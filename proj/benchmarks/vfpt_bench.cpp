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

#include <benchmark/benchmark.h>

#include "vfpt/fourier.hpp"
#include "vfpt/model.hpp"
#include "vfpt/random.hpp"
#include "vfpt/training.hpp"
#include "vfpt/verify/suites.hpp"

using namespace vfpt;

namespace {

void BM_Fft1d(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  Tensor t({n});
  rng.fill_uniform(t, -1, 1);
  const ComplexTensor x = ComplexTensor::from_real(t);
  for (auto _ : state) benchmark::DoNotOptimize(fft_1d(x, 0));
}
BENCHMARK(BM_Fft1d)->Arg(64)->Arg(96)->Arg(97)->Arg(768)->Arg(1024);

void BM_FourierPrompt(benchmark::State& state) {
  const std::size_t m = static_cast<std::size_t>(state.range(0)), d = static_cast<std::size_t>(state.range(1));
  Rng rng(2);
  Tensor t({m, d});
  rng.fill_uniform(t, -1, 1);
  for (auto _ : state) benchmark::DoNotOptimize(fourier_prompt(t));
}
BENCHMARK(BM_FourierPrompt)->Args({2, 64})->Args({8, 768});

void BM_Predict(benchmark::State& state) {
  Model model = Model::create(Config::desk());
  Rng rng(3);
  const DualInputs in = verify::random_inputs(model.config.encoder, rng);
  for (auto _ : state) benchmark::DoNotOptimize(predict(model, in));
}
BENCHMARK(BM_Predict)->Unit(benchmark::kMillisecond);

void BM_TrainStep(benchmark::State& state) {
  Trainer trainer(Config::desk(), {generate(verify::toy_spec(1, 12))});
  for (auto _ : state) benchmark::DoNotOptimize(trainer.step());
}
BENCHMARK(BM_TrainStep)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
