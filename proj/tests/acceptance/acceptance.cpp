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

// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "vfpt/experiment.hpp"
#include "vfpt/metrics.hpp"
#include "vfpt/tracker.hpp"
#include "vfpt/training.hpp"
#include "vfpt/verify/oracles.hpp"
#include "vfpt/verify/suites.hpp"

using namespace vfpt;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "FAILED ") + what;
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / "vfpt_acceptance" / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

// Sequences written to disk and read back, as the CLI sees them.
std::vector<Sequence> materialize(const std::vector<SyntheticSpec>& specs, const std::string& tag) {
  const fs::path dir = scratch(tag);
  for (std::size_t k = 0; k < specs.size(); ++k) {
    save_sequence(generate(specs[k]), dir / ("seq" + std::to_string(k + 1)));
  }
  return load_dataset(dir);
}

Outcome from_suite(const std::string& suite, const verify::SuiteOptions& opts = {}) {
  Outcome o;
  std::size_t passed = 0;
  const auto results = verify::run_suite(suite, opts);
  for (const auto& r : results) {
    if (r.passed) {
      ++passed;
    } else {
      o.require(false, r.name + " (" + r.detail + ")");
    }
  }
  o.require(!results.empty(), std::to_string(passed) + "/" + std::to_string(results.size()) + " checks");
  return o;
}

Outcome fft_oracle() { return from_suite("fft"); }

Outcome gradient_suite() {
  verify::SuiteOptions opts;
  opts.seeds = 20;
  return from_suite("grad", opts);
}

Outcome freeze_contract() { return from_suite("freeze"); }

Outcome constants() {
  Outcome o;
  const Config desk = Config::desk(), full = Config::full_scale();
  for (const auto& [tag, c] : {std::pair<std::string, const Config*>{"desk", &desk}, {"full-scale", &full}}) {
    o.require(c->loss.lambda_giou == 2.0 && c->loss.lambda_l1 == 5.0 && c->prompt.alpha == 0.2 &&
                  c->optim.lr == 4e-4 && c->optim.weight_decay == 1e-4,
              tag + ": lambda_giou=2, lambda_l1=5, alpha=0.2, lr=4e-4, wd=1e-4");
  }
  o.require(full.mfpg.beta == 96 && full.encoder.dim == 768 && full.encoder.dim / full.mfpg.beta == 8,
            "beta=96, 768->8");
  // what a config file with no entries resolves to
  o.require(Config::parse("", "<empty>") == desk, "empty config file resolves to the defaults");
  return o;
}

Outcome mfpg_properties() { return from_suite("mfpg"); }

Outcome reductions() {
  Outcome o;
  const std::vector<Sequence> data = {generate(verify::toy_spec(6, 16), "reduction")};
  Config zero = Config::desk();
  zero.optim.steps = 10;
  zero.prompt.alpha = 0.0;
  Config spatial = zero;
  spatial.prompt.alpha = Config::desk().prompt.alpha;
  spatial.prompt.fourier_enabled = false;
  Trainer tz(zero, data), ts(spatial, data);
  tz.run();
  ts.run();
  const EvalReport ez = evaluate_model(tz.model(), data), es = evaluate_model(ts.model(), data);
  o.require(ez.overall.sr == es.overall.sr && ez.overall.pr == es.overall.pr && ez.overall.npr == es.overall.npr,
            "alpha=0 vs spatial-only: SR " + fmt("%.6f", ez.overall.sr) + " / " + fmt("%.6f", es.overall.sr));

  Config bare = Config::desk();
  bare.prompt.count = 0;
  bare.mfpg.layers = LayerSelection::none();
  Model model = Model::create(bare);
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Rng rng(seed);
    const DualInputs in = verify::random_inputs(bare.encoder, rng);
    Tape tape;
    const DualOutput out = forward_dual(tape, in, bare, model.encoder, model.prompts, model.mfpg);
    worst = std::max(worst, max_abs_diff(out.rgb.value(), verify::single_stream_reference(
                                                               in.rgb_template, in.rgb_search, model.encoder, bare.encoder)));
    worst = std::max(worst, max_abs_diff(out.tir.value(), verify::single_stream_reference(
                                                               in.tir_template, in.tir_search, model.encoder, bare.encoder)));
  }
  o.require(worst < 1e-12, "M=0 + MFPG off vs single streams, max diff " + fmt("%.3g", worst));
  return o;
}

Outcome overfit() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<Sequence> data = materialize({SyntheticSpec{}}, "overfit");
  Config cfg = Config::desk();
  cfg.optim.steps = 300;
  Trainer trainer(cfg, data);
  const std::vector<LossRecord> curve = trainer.run();
  const std::size_t tail = std::max<std::size_t>(1, curve.size() / 10);
  double late = 0.0;
  for (std::size_t k = curve.size() - tail; k < curve.size(); ++k) late += curve[k].total;
  late /= static_cast<double>(tail);
  const double drop = 1.0 - late / curve.front().total;
  o.require(drop >= 0.9, "loss " + fmt("%.4f", curve.front().total) + " -> " + fmt("%.4f", late) +
                             " (last 10% mean), drop " + fmt("%.1f%%", 100 * drop));
  const std::vector<ImageBox> boxes = track_sequence(data[0], trainer.model());
  double mean_iou = 0.0;
  for (std::size_t t = 0; t < boxes.size(); ++t) mean_iou += iou(boxes[t], data[0].frames[t].gt);
  mean_iou /= static_cast<double>(boxes.size());
  o.require(mean_iou > 0.5, "mean IoU " + fmt("%.3f", mean_iou));
  const double secs = seconds_since(t0);
  o.require(secs < 600.0, "runtime " + fmt("%.1f s", secs));
  return o;
}

SyntheticSpec event_spec(std::uint64_t seed) {
  SyntheticSpec s;
  s.length = 40;
  s.seed = seed;
  s.darkness = {{6, 13}};
  s.crossover = {{18, 25}};
  s.occlusion = {{30, 32}};
  return s;
}

Outcome modality_ablation() {
  Outcome o;
  const std::vector<Sequence> train =
      materialize({event_spec(13), event_spec(26), event_spec(39), event_spec(52)}, "ablation_train");
  const std::vector<Sequence> held_out = materialize({event_spec(65), event_spec(78), event_spec(91)}, "ablation_eval");
  Config cfg = Config::desk();
  cfg.optim.steps = 600;
  Trainer trainer(cfg, train);
  trainer.run();
  const double both = evaluate_model(trainer.model(), held_out, ModalityMask::kBoth).overall.sr;
  const double rgb = evaluate_model(trainer.model(), held_out, ModalityMask::kRgbOnly).overall.sr;
  const double tir = evaluate_model(trainer.model(), held_out, ModalityMask::kTirOnly).overall.sr;
  o.require(both - rgb >= 0.03, "SR dual " + fmt("%.3f", both) + " vs TIR-zeroed " + fmt("%.3f", rgb));
  o.require(both - tir >= 0.03, "vs RGB-zeroed " + fmt("%.3f", tir));
  return o;
}

Outcome metrics_toolkit() { return from_suite("metrics"); }

Outcome determinism() {
  Outcome o;
  const std::vector<Sequence> data = {generate(verify::toy_spec(12, 16), "det")};
  Config cfg = Config::desk();
  cfg.optim.steps = 8;
  Trainer a(cfg, data), b(cfg, data);
  const auto ca = a.run(), cb = b.run();
  bool same = ca.size() == cb.size();
  for (std::size_t k = 0; same && k < ca.size(); ++k) same = ca[k].total == cb[k].total && ca[k].cls == cb[k].cls;
  o.require(same, "identical loss curves");
  o.require(track_sequence(data[0], a.model()) == track_sequence(data[0], b.model()), "identical tracking outputs");

  const fs::path dir = scratch("persist");
  a.checkpoint().save(dir / "a.ckpt");
  Checkpoint::load(dir / "a.ckpt").save(dir / "b.ckpt");
  o.require(a.checkpoint().serialize() == Checkpoint::load(dir / "b.ckpt").serialize(),
            "checkpoint save/load/save byte-identical");

  save_sequence(data[0], dir / "seq");
  const Sequence back = load_sequence(dir / "seq");
  double worst = 0.0;
  for (std::size_t t = 0; t < back.frames.size(); ++t) {
    worst = std::max(worst, max_abs_diff(back.frames[t].rgb, data[0].frames[t].rgb));
    worst = std::max(worst, max_abs_diff(back.frames[t].tir, data[0].frames[t].tir));
  }
  o.require(back.frames.size() == data[0].frames.size() && worst <= 1.0 / 255.0,
            "dataset round trip max diff " + fmt("%.5f", worst));
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"fft oracle", fft_oracle},
      {"gradient suite (20 seeds)", gradient_suite},
      {"freeze contract", freeze_contract},
      {"constants", constants},
      {"mfpg properties", mfpg_properties},
      {"reductions", reductions},
      {"overfit", overfit},
      {"modality ablation", modality_ablation},
      {"metrics toolkit", metrics_toolkit},
      {"determinism and persistence", determinism},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failures += o.pass ? 0 : 1;
    std::printf("%s  %2zu %-30s %7.1fs  %s\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(),
                seconds_since(t0), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
