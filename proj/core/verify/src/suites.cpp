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

#include "vfpt/verify/suites.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <functional>
#include <sstream>

#include "vfpt/fourier.hpp"
#include "vfpt/head.hpp"
#include "vfpt/loss.hpp"
#include "vfpt/metrics.hpp"
#include "vfpt/mfpg.hpp"
#include "vfpt/ops.hpp"
#include "vfpt/prompts.hpp"
#include "vfpt/training.hpp"
#include "vfpt/verify/oracles.hpp"

namespace vfpt::verify {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

Tensor random_tensor(Rng& rng, Shape shape, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  rng.fill_uniform(t, lo, hi);
  return t;
}

CheckResult result(const std::string& suite, const std::string& name, bool ok, const std::string& detail) {
  return {suite, name, ok, detail};
}

// ---------------------------------------------------------------- fft

ComplexTensor random_complex(Rng& rng, Shape shape) {
  ComplexTensor c(std::move(shape));
  for (std::size_t k = 0; k < c.size(); ++k) c.set(k, {rng.uniform(-1, 1), rng.uniform(-1, 1)});
  return c;
}

std::vector<CheckResult> fft_suite(const SuiteOptions& opt) {
  const auto t0 = Clock::now();
  std::vector<CheckResult> out;
  const FftEngine engine(opt.fft_twiddle_error);
  Rng rng(0x5eed);

  double worst_small = 0.0;
  std::size_t worst_n = 0;
  for (std::size_t n = 1; n <= 64; ++n) {
    const ComplexTensor x = random_complex(rng, {n});
    const double d = max_abs_diff(engine.transform(x, 0), dft_1d_naive(x, 0));
    if (d > worst_small) {
      worst_small = d;
      worst_n = n;
    }
  }
  out.push_back(result("fft", "fft_1d == naive DFT, lengths 1..64", worst_small < 1e-9,
                       "max abs diff " + fmt(worst_small) + " at n=" + std::to_string(worst_n)));

  double worst_large = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = static_cast<std::size_t>(rng.uniform_int(65, 1024));
    const ComplexTensor x = random_complex(rng, {n});
    worst_large = std::max(worst_large, max_abs_diff(engine.transform(x, 0), dft_1d_naive(x, 0)));
  }
  out.push_back(result("fft", "fft_1d == naive DFT, 100 random lengths 65..1024", worst_large < 1e-9,
                       "max abs diff " + fmt(worst_large)));

  double worst_axis = 0.0;
  for (const Shape& s : {Shape{6, 10}, Shape{7, 12}, Shape{3, 5, 9}}) {
    const ComplexTensor x = random_complex(rng, s);
    for (std::size_t axis = 0; axis < s.size(); ++axis) {
      worst_axis = std::max(worst_axis, max_abs_diff(engine.transform(x, axis), dft_1d_naive(x, axis)));
    }
  }
  out.push_back(result("fft", "fft along every axis of 2D/3D arrays", worst_axis < 1e-9,
                       "max abs diff " + fmt(worst_axis)));

  double worst_prompt = 0.0;
  for (const Shape& s : {Shape{1, 1}, Shape{2, 64}, Shape{8, 64}, Shape{5, 12}, Shape{3, 96}, Shape{16, 48}}) {
    const Tensor t = random_tensor(rng, s);
    Tensor spectrum;
    if (opt.fft_twiddle_error != 0.0) {
      ComplexTensor c = ComplexTensor::from_real(t);
      spectrum = engine.transform(engine.transform(c, 1), 0).real();
    } else {
      spectrum = fourier_prompt(t);
    }
    worst_prompt = std::max(worst_prompt, max_abs_diff(spectrum, dft2_real_reference(t)));
  }
  out.push_back(result("fft", "fourier prompt == Re(naive 2D DFT)", worst_prompt < 1e-9,
                       "max abs diff " + fmt(worst_prompt)));

  const double elapsed = seconds_since(t0);
  out.push_back(result("fft", "runtime < 10 s", elapsed < 10.0, fmt(elapsed) + " s"));
  return out;
}

// ---------------------------------------------------------------- grad

std::vector<CheckResult> grad_suite(const SuiteOptions& opt) {
  const auto t0 = Clock::now();
  std::map<std::string, GradCheck> worst_op;
  std::map<std::string, GradCheck> worst_model;
  auto keep = [](std::map<std::string, GradCheck>& into, const GradCheck& g) {
    auto it = into.find(g.name);
    if (it == into.end() || g.rel_err() > it->second.rel_err()) into[g.name] = g;
  };
  for (std::size_t s = 0; s < opt.seeds; ++s) {
    for (const GradCheck& g : op_gradient_checks(1000 + s)) keep(worst_op, g);
    for (const GradCheck& g : model_gradient_checks(2000 + s)) keep(worst_model, g);
  }
  std::vector<CheckResult> out;
  for (const auto& [name, g] : worst_op) {
    out.push_back(result("grad", "op " + name, g.rel_err() < kOpGradTolerance && g.checked > 0,
                         "rel err " + fmt(g.rel_err()) + " over " + std::to_string(opt.seeds) + " seeds"));
  }
  for (const auto& [name, g] : worst_model) {
    out.push_back(result("grad", "model " + name, g.rel_err() < kModelGradTolerance && g.checked > 0,
                         "rel err " + fmt(g.rel_err()) + " over " + std::to_string(opt.seeds) + " seeds"));
  }
  const double elapsed = seconds_since(t0);
  out.push_back(result("grad", "runtime < 120 s", elapsed < 120.0, fmt(elapsed) + " s"));
  return out;
}

// ---------------------------------------------------------------- freeze

std::vector<CheckResult> freeze_suite(const SuiteOptions&) {
  std::vector<CheckResult> out;
  Config cfg = Config::desk();
  cfg.seed = 11;
  Trainer trainer(cfg, {generate(toy_spec(3, 20))});
  Model& m = trainer.model();
  const Partition part = partition_params(m);
  std::size_t trainable = 0;
  for (Param* p : part.trainable) trainable += p->size();
  const std::size_t mfpg_layers = cfg.mfpg.layers.resolve(cfg.encoder.layers).size();
  const std::size_t budget = prompt_param_budget(cfg.prompt, cfg.encoder.dim, cfg.encoder.layers) +
                             mfpg_layers * mfpg_layer_budget(cfg.encoder.dim, cfg.mfpg.beta) +
                             head_param_budget(cfg.encoder.dim);
  out.push_back(result("freeze", "trainable count == prompt + MFPG + head budgets", trainable == budget,
                       std::to_string(trainable) + " vs " + std::to_string(budget)));
  out.push_back(result("freeze", "every parameter in exactly one set",
                       part.frozen.size() + part.trainable.size() == m.params().size(),
                       std::to_string(part.frozen.size()) + " frozen + " + std::to_string(part.trainable.size()) +
                           " trainable of " + std::to_string(m.params().size())));

  const std::string before = frozen_digest(m);
  std::vector<Tensor> trainable_before;
  for (Param* p : part.trainable) trainable_before.push_back(p->value);
  for (int s = 0; s < 100; ++s) trainer.step();
  const std::string after = frozen_digest(m);
  double moved = 0.0;
  for (std::size_t i = 0; i < part.trainable.size(); ++i) {
    moved = std::max(moved, max_abs_diff(part.trainable[i]->value, trainable_before[i]));
  }
  out.push_back(result("freeze", "frozen SHA-256 unchanged after 100 steps", before == after, after.substr(0, 16)));
  out.push_back(result("freeze", "trainable set changed after 100 steps", moved > 0.0, "max change " + fmt(moved)));
  return out;
}

// ---------------------------------------------------------------- mfpg

std::vector<CheckResult> mfpg_suite(const SuiteOptions&) {
  std::vector<CheckResult> out;
  Config cfg = Config::desk();
  const TokenLayout layout = cfg.encoder.layout(0);
  Rng rng(77);
  const Tensor fr = random_tensor(rng, {layout.image_tokens(), cfg.encoder.dim});
  const Tensor ft = random_tensor(rng, {layout.image_tokens(), cfg.encoder.dim});

  MfpgParams fresh = init_mfpg(cfg.mfpg, cfg.encoder, 5);
  {
    Tape tape;
    Var a = tape.constant(fr), b = tape.constant(ft);
    Var p = mfpg_forward(tape, a, b, fresh.layers.at(1), layout, cfg.encoder.ln_eps);
    auto [na, nb] = inject_residual(a, b, p);
    const bool ident = na.value() == fr && nb.value() == ft;
    out.push_back(result("mfpg", "fresh generator leaves both streams unchanged", ident,
                         "max |P| " + fmt(max_abs_diff(p.value(), Tensor(p.shape())))));
  }

  for (bool shared : {true, false}) {
    MfpgConfig mc = cfg.mfpg;
    mc.shared_projection = shared;
    MfpgParams params = init_mfpg(mc, cfg.encoder, 9);
    MfpgLayerParams& lp = params.layers.at(1);
    for (Param* p : lp.params()) rng.fill_uniform(p->value, -0.3, 0.3);
    Tape tape;
    Var a = tape.constant(fr), b = tape.constant(ft);
    const Tensor p1 = mfpg_forward(tape, a, b, lp, layout, cfg.encoder.ln_eps).value();
    const Tensor ref = mfpg_reference(fr, ft, lp, layout, cfg.encoder.ln_eps);
    const double diff = max_abs_diff(p1, ref);
    const std::string tag = shared ? "shared" : "separate";
    out.push_back(result("mfpg", "loop-level oracle, " + tag + " projection", diff < 1e-12, "max abs diff " + fmt(diff)));
    if (shared) {
      const Tensor p2 = mfpg_forward(tape, b, a, lp, layout, cfg.encoder.ln_eps).value();
      out.push_back(result("mfpg", "modality swap gives identical P", p1 == p2, "bitwise comparison"));
    }
  }

  const Config full = Config::full_scale();
  MfpgConfig one = full.mfpg;
  one.layers = LayerSelection::range(1, 1);
  MfpgParams big = init_mfpg(one, full.encoder, 1);
  std::size_t count = 0;
  for (Param* p : big.params()) count += p->size();
  out.push_back(result("mfpg", "full-scale per-layer budget == 63752 by enumeration",
                       count == 63752 && mfpg_layer_budget(full.encoder.dim, full.mfpg.beta) == 63752,
                       std::to_string(count) + " parameters (D=" + std::to_string(full.encoder.dim) +
                           ", beta=" + std::to_string(full.mfpg.beta) + ")"));
  return out;
}

// ---------------------------------------------------------------- metrics

std::vector<CheckResult> metrics_suite(const SuiteOptions&) {
  std::vector<CheckResult> out;
  Rng rng(4242);
  std::vector<ImageBox> gts;
  for (int t = 0; t < 40; ++t) {
    gts.push_back({rng.uniform(0, 200), rng.uniform(0, 150), rng.uniform(5, 60), rng.uniform(5, 60)});
  }
  const SequenceReport self = evaluate(gts, gts);
  out.push_back(result("metrics", "gt as predictions gives SR = PR = NPR = 1",
                       self.sr == 1.0 && self.pr == 1.0 && self.npr == 1.0,
                       "SR " + fmt(self.sr) + " PR " + fmt(self.pr) + " NPR " + fmt(self.npr)));

  const double half = iou({0, 0, 2, 2}, {1, 0, 2, 2});
  out.push_back(result("metrics", "half-overlap IoU == 1/3", std::abs(half - 1.0 / 3.0) < 1e-15, fmt(half)));

  // Five frames with IoU 1, 1/3, 0, 1/2, 1/7 and centre errors 0, 5, 50, 2.5, 7.0710678.
  const std::vector<ImageBox> g5 = {{0, 0, 10, 10}, {0, 0, 10, 10}, {0, 0, 10, 10}, {0, 0, 10, 10}, {0, 0, 10, 10}};
  const std::vector<ImageBox> p5 = {{0, 0, 10, 10}, {5, 0, 10, 10}, {50, 0, 10, 10}, {0, 0, 10, 5}, {5, 5, 10, 10}};
  const double ious[5] = {1.0, 1.0 / 3.0, 0.0, 0.5, 1.0 / 7.0};
  const double errs[5] = {0.0, 5.0, 50.0, 2.5, std::sqrt(50.0)};
  const SequenceReport r5 = evaluate(p5, g5);
  bool curve_ok = true;
  double sr = 0.0;
  for (std::size_t k = 0; k <= 20; ++k) {
    const double tau = static_cast<double>(k) / 20.0;
    int hits = 0;
    for (double v : ious) hits += (k == 20 ? v >= 1.0 : v > tau) ? 1 : 0;
    curve_ok = curve_ok && r5.success[k] == hits / 5.0;
    sr += hits / 5.0;
  }
  sr /= 21.0;
  int pr_hits = 0, npr_hits = 0;
  for (int t = 0; t < 5; ++t) {
    pr_hits += errs[t] <= 20.0 ? 1 : 0;
    npr_hits += errs[t] / 10.0 <= 0.2 ? 1 : 0;  // gt is 10 x 10 and offsets are axis-aligned or diagonal
  }
  out.push_back(result("metrics", "5-frame case == brute-force counting",
                       curve_ok && std::abs(r5.sr - sr) < 1e-15 && r5.pr == pr_hits / 5.0 && r5.npr == npr_hits / 5.0,
                       "SR " + fmt(r5.sr) + " vs " + fmt(sr) + ", PR " + fmt(r5.pr) + ", NPR " + fmt(r5.npr)));

  bool monotone = true;
  for (int trial = 0; trial < 50 && monotone; ++trial) {
    std::vector<ImageBox> preds;
    for (const ImageBox& g : gts) {
      preds.push_back({g.x + rng.uniform(-20, 20), g.y + rng.uniform(-20, 20), g.w * rng.uniform(0.5, 1.5),
                       g.h * rng.uniform(0.5, 1.5)});
    }
    const SequenceReport r = evaluate(preds, gts);
    for (std::size_t k = 1; k < r.success.size(); ++k) monotone = monotone && r.success[k] <= r.success[k - 1];
  }
  out.push_back(result("metrics", "success curve non-increasing (50 random runs)", monotone, ""));

  std::vector<ImageBox> preds, sp, sg;
  for (const ImageBox& g : gts) preds.push_back({g.x + rng.uniform(-8, 8), g.y + rng.uniform(-8, 8), g.w, g.h});
  for (std::size_t t = 0; t < gts.size(); ++t) {
    sp.push_back({preds[t].x * 3, preds[t].y * 3, preds[t].w * 3, preds[t].h * 3});
    sg.push_back({gts[t].x * 3, gts[t].y * 3, gts[t].w * 3, gts[t].h * 3});
  }
  const double n1 = evaluate(preds, gts).npr, n2 = evaluate(sp, sg).npr;
  out.push_back(result("metrics", "NPR invariant to uniform scaling", n1 == n2, fmt(n1) + " vs " + fmt(n2)));
  return out;
}

// ---------------------------------------------------------------- op checks

BlockParams small_block(std::uint64_t seed, EncoderConfig* cfg_out) {
  EncoderConfig ec;
  ec.layers = 1;
  ec.dim = 8;
  ec.heads = 2;
  ec.mlp_ratio = 2;
  ec.patch = 4;
  ec.template_size = 8;
  ec.search_size = 8;
  if (cfg_out) *cfg_out = ec;
  EncoderParams e = init_encoder(ec, seed);
  Rng rng(seed + 1);
  BlockParams b = e.blocks[0];
  rng.fill_uniform(b.ln1_g.value, 0.5, 1.5);
  rng.fill_uniform(b.ln2_b.value, -0.2, 0.2);
  return b;
}

}  // namespace

std::vector<std::string> suite_names() { return {"fft", "grad", "freeze", "mfpg", "metrics"}; }

std::vector<CheckResult> run_suite(const std::string& name, const SuiteOptions& options) {
  if (name == "fft") return fft_suite(options);
  if (name == "grad") return grad_suite(options);
  if (name == "freeze") return freeze_suite(options);
  if (name == "mfpg") return mfpg_suite(options);
  if (name == "metrics") return metrics_suite(options);
  if (name == "all") {
    std::vector<CheckResult> out;
    for (const std::string& s : suite_names()) {
      auto r = run_suite(s, options);
      out.insert(out.end(), r.begin(), r.end());
    }
    return out;
  }
  throw ConfigError("unknown suite '" + name + "' (expected fft, grad, freeze, mfpg, metrics or all)");
}

Config gradient_config() {
  Config c = Config::desk();
  c.prompt.adaptive_alpha = true;
  return c;
}

SyntheticSpec toy_spec(std::uint64_t seed, std::size_t length) {
  SyntheticSpec s;
  s.seed = seed;
  s.length = length;
  s.darkness = {{length / 5, length / 5 + length / 6}};
  s.crossover = {{length / 2, length / 2 + length / 8}};
  if (length >= 4) s.occlusion = {{length - 2 - length / 6, length - 1 - length / 6}};
  return s;
}

DualInputs random_inputs(const EncoderConfig& cfg, Rng& rng) {
  const std::size_t z = cfg.template_size, x = cfg.search_size;
  return {random_tensor(rng, {3, z, z}, 0, 1), random_tensor(rng, {3, x, x}, 0, 1), random_tensor(rng, {3, z, z}, 0, 1),
          random_tensor(rng, {3, x, x}, 0, 1)};
}

void randomize_trainable(Model& model, std::uint64_t seed, double scale) {
  Rng rng(seed);
  for (Param* p : partition_params(model).trainable) {
    const bool all_zero = std::all_of(p->value.data().begin(), p->value.data().end(), [](double v) { return v == 0.0; });
    if (all_zero) rng.fill_uniform(p->value, -scale, scale);
  }
}

std::vector<GradCheck> op_gradient_checks(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<GradCheck> out;
  auto r = [&rng](Shape s, double lo = -1.0, double hi = 1.0) { return random_tensor(rng, std::move(s), lo, hi); };
  const std::uint64_t s = seed * 31 + 7;

  out.push_back(check_op("add", [](Tape&, const std::vector<Var>& v) { return ops::add(v[0], v[1]); },
                         {r({3, 4}), r({3, 4})}, s));
  out.push_back(check_op("scale", [](Tape&, const std::vector<Var>& v) { return ops::scale(v[0], 1.7); },
                         {r({3, 4})}, s));
  out.push_back(check_op("sum", [](Tape&, const std::vector<Var>& v) { return ops::sum(v[0]); }, {r({3, 4})}, s));
  out.push_back(check_op("linear", [](Tape&, const std::vector<Var>& v) { return ops::linear(v[0], v[1], v[2]); },
                         {r({3, 4}), r({4, 5}), r({5})}, s));
  out.push_back(check_op("linear (no bias)",
                         [](Tape&, const std::vector<Var>& v) { return ops::linear(v[0], v[1], Var{}); },
                         {r({3, 4}), r({4, 5})}, s));
  out.push_back(check_op("layer_norm",
                         [](Tape&, const std::vector<Var>& v) { return ops::layer_norm(v[0], v[1], v[2], 1e-6); },
                         {r({3, 6}), r({6}), r({6})}, s));
  out.push_back(check_op("gelu", [](Tape&, const std::vector<Var>& v) { return ops::gelu(v[0]); }, {r({3, 5}, -3, 3)}, s));
  out.push_back(check_op("sigmoid", [](Tape&, const std::vector<Var>& v) { return ops::sigmoid(v[0]); },
                         {r({3, 5}, -3, 3)}, s));
  for (std::size_t axis : {0u, 1u}) {
    out.push_back(check_op("softmax axis " + std::to_string(axis),
                           [axis](Tape&, const std::vector<Var>& v) { return ops::softmax(v[0], axis); },
                           {r({3, 5}, -2, 2)}, s));
  }
  out.push_back(check_op("conv2d", [](Tape&, const std::vector<Var>& v) { return ops::conv2d(v[0], v[1], v[2]); },
                         {r({2, 4, 5}), r({3, 2, 3, 3}), r({3})}, s));
  out.push_back(check_op("attention", [](Tape&, const std::vector<Var>& v) { return ops::attention(v[0], 2); },
                         {r({5, 24})}, s));
  out.push_back(check_op("slice_rows", [](Tape&, const std::vector<Var>& v) { return ops::slice_rows(v[0], 1, 3); },
                         {r({5, 3})}, s));
  out.push_back(check_op("concat_rows",
                         [](Tape&, const std::vector<Var>& v) {
                           const Var parts[] = {v[0], v[1]};
                           return ops::concat_rows(parts);
                         },
                         {r({2, 3}), r({3, 3})}, s));
  out.push_back(check_op("tokens_to_grid",
                         [](Tape&, const std::vector<Var>& v) { return ops::tokens_to_grid(v[0], 2, 3); }, {r({6, 4})}, s));
  out.push_back(check_op("grid_to_tokens", [](Tape&, const std::vector<Var>& v) { return ops::grid_to_tokens(v[0]); },
                         {r({4, 2, 3})}, s));
  out.push_back(check_op("mean_rows", [](Tape&, const std::vector<Var>& v) { return ops::mean_rows(v[0]); },
                         {r({5, 3})}, s));
  out.push_back(check_op("blend", [](Tape&, const std::vector<Var>& v) { return ops::blend(v[0], v[1], v[2]); },
                         {r({1}, 0.1, 0.9), r({3, 4}), r({3, 4})}, s));
  out.push_back(check_op("select_cell", [](Tape&, const std::vector<Var>& v) { return ops::select_cell(v[0], 2, 1); },
                         {r({3, 4, 5})}, s));
  for (FftMode mode : {FftMode::kChannelOnly, FftMode::kSpatialOnly, FftMode::kBoth}) {
    for (FftOutput o : {FftOutput::kReal, FftOutput::kMagnitude}) {
      out.push_back(check_op("fourier prompt " + to_string(mode) + "/" + to_string(o),
                             [mode, o](Tape&, const std::vector<Var>& v) { return fourier_prompt_op(v[0], mode, o); },
                             {r({3, 8})}, s));
    }
  }

  const BBox gt{rng.uniform(0.35, 0.65), rng.uniform(0.35, 0.65), rng.uniform(0.15, 0.35), rng.uniform(0.15, 0.35)};
  const Tensor target = gaussian_target(gt, 4, 4);
  out.push_back(check_op("focal_loss",
                         [target](Tape&, const std::vector<Var>& v) { return ops::focal_loss(v[0], target); },
                         {r({1, 4, 4}, 0.05, 0.95)}, s));
  out.push_back(check_op("cell_box", [](Tape&, const std::vector<Var>& v) { return ops::cell_box(v[0], v[1], 1, 2); },
                         {r({2, 4, 4}, 0, 1), r({2, 4, 4}, 0, 1)}, s));
  Tensor overlapping({4}, std::vector<double>{gt.cx + rng.uniform(-0.1, 0.1), gt.cy + rng.uniform(-0.1, 0.1),
                                               gt.w * rng.uniform(0.6, 1.4), gt.h * rng.uniform(0.6, 1.4)});
  Tensor disjoint({4}, std::vector<double>{gt.cx + 0.6, gt.cy - 0.5, rng.uniform(0.1, 0.3), rng.uniform(0.1, 0.3)});
  out.push_back(check_op("giou_loss (overlapping)",
                         [gt](Tape&, const std::vector<Var>& v) { return ops::giou_loss(v[0], gt); }, {overlapping}, s));
  out.push_back(check_op("giou_loss (disjoint)",
                         [gt](Tape&, const std::vector<Var>& v) { return ops::giou_loss(v[0], gt); }, {disjoint}, s));
  out.push_back(check_op("l1_loss", [gt](Tape&, const std::vector<Var>& v) { return ops::l1_loss(v[0], gt); },
                         {overlapping}, s));

  EncoderConfig ec;
  const BlockParams block = small_block(seed, &ec);
  out.push_back(check_op("vit_block",
                         [&block, ec](Tape& t, const std::vector<Var>& v) {
                           return vit_block(t, v[0], block, ec.heads, ec.ln_eps);
                         },
                         {r({6, 8})}, s));

  // head on a 1 x (D=4) x 2 x 2 instance
  HeadParams head = init_head(4, seed);
  for (Param* p : head.params()) rng.fill_uniform(p->value, -0.6, 0.6);
  const Tensor hx = r({4, 2, 2});
  for (int branch = 0; branch < 3; ++branch) {
    const char* label[3] = {"score", "offset", "size"};
    auto pick = [branch](const HeadVars& h) { return branch == 0 ? h.score : (branch == 1 ? h.offset : h.size); };
    out.push_back(check_op(std::string("head input -> ") + label[branch],
                           [&head, pick](Tape& t, const std::vector<Var>& v) { return pick(head_forward(t, v[0], head)); },
                           {hx}, s));
    out.push_back(check_params(std::string("head params -> ") + label[branch],
                               [&head, &hx, pick](Tape& t) { return pick(head_forward(t, t.constant(hx), head)); },
                               head.params(), s));
  }

  // MFPG on a 2x2 template / 3x3 search layout, D = 8, beta = 2
  const TokenLayout layout{0, 4, 9, 2, 3};
  EncoderConfig mec;
  mec.dim = 8;
  mec.layers = 1;
  for (bool shared : {true, false}) {
    MfpgConfig mc;
    mc.beta = 2;
    mc.shared_projection = shared;
    MfpgParams mp = init_mfpg(mc, mec, seed);
    MfpgLayerParams& lp = mp.layers.at(1);
    for (Param* p : lp.params()) rng.fill_uniform(p->value, -0.5, 0.5);
    const std::string tag = shared ? " (shared projection)" : " (separate projections)";
    const Tensor a = r({13, 8}), b = r({13, 8});
    out.push_back(check_op("mfpg inputs" + tag,
                           [&lp, layout](Tape& t, const std::vector<Var>& v) {
                             return mfpg_forward(t, v[0], v[1], lp, layout, 1e-6);
                           },
                           {a, b}, s));
    out.push_back(check_params("mfpg params" + tag,
                               [&lp, layout, &a, &b](Tape& t) {
                                 return mfpg_forward(t, t.constant(a), t.constant(b), lp, layout, 1e-6);
                               },
                               lp.params(), s));
  }

  // prompts: Fourier rows with the adaptive gate, cross-modal update
  PromptConfig pc;
  pc.count = 4;
  pc.alpha = 0.5;
  pc.adaptive_alpha = true;
  PromptSet ps = init_prompts(pc, 8, 2, seed);
  for (Param* p : ps.params()) rng.fill_uniform(p->value, -0.5, 0.5);
  const Tensor context = r({7, 8});
  const Tensor other = r({4, 8});
  out.push_back(check_op("assemble_prompt_tokens inputs",
                         [&ps, pc](Tape& t, const std::vector<Var>& v) {
                           return assemble_prompt_tokens(t, ps, pc, Modality::kTir, 2, v[0], v[1]);
                         },
                         {r({4, 8}), context}, s));
  out.push_back(check_params("assemble_prompt_tokens params",
                             [&ps, pc, &context](Tape& t) {
                               Var cur = t.leaf(ps.initial(Modality::kRgb, 1));
                               return assemble_prompt_tokens(t, ps, pc, Modality::kRgb, 1, cur, t.constant(context));
                             },
                             ps.params(), s));
  out.push_back(check_op("update_prompts input",
                         [&ps](Tape& t, const std::vector<Var>& v) {
                           return update_prompts(t, ps, 2, Modality::kRgb, v[0]);
                         },
                         {other}, s));
  out.push_back(check_params("update_prompts params",
                             [&ps, &other](Tape& t) {
                               return update_prompts(t, ps, 2, Modality::kTir, t.constant(other));
                             },
                             ps.params(), s));
  return out;
}

std::vector<GradCheck> model_gradient_checks(std::uint64_t seed, std::size_t per_module) {
  Config cfg = gradient_config();
  cfg.seed = seed;
  Model model = Model::create(cfg);
  randomize_trainable(model, seed + 17, 0.2);
  Rng rng(seed + 5);
  const DualInputs inputs = random_inputs(cfg.encoder, rng);
  const BBox gt{rng.uniform(0.35, 0.65), rng.uniform(0.35, 0.65), rng.uniform(0.15, 0.35), rng.uniform(0.15, 0.35)};
  auto build = [&](Tape& t) { return total_loss(forward(t, model, inputs).head, gt, cfg.loss).total; };

  std::map<std::string, std::vector<Param*>> groups;
  for (Param* p : model.prompts.params()) {
    const std::string& n = p->name;
    const char* g = n.find(".gate.") != std::string::npos        ? "prompt gate"
                    : n.find(".transform.") != std::string::npos ? "cross-modal transform"
                                                                 : "prompt init";
    groups[g].push_back(p);
  }
  groups["mfpg"] = model.mfpg.params();
  groups["head"] = model.head.params();

  std::vector<GradCheck> out;
  std::uint64_t k = 0;
  for (auto& [name, params] : groups) {
    out.push_back(check_params(name, build, params, seed * 101 + (k++), 1e-6, per_module));
  }
  return out;
}

}  // namespace vfpt::verify
