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

#include "vfpt/experiment.hpp"

#include <cstdio>
#include <fstream>

#include "vfpt/errors.hpp"
#include "vfpt/training.hpp"

namespace vfpt {

EvalReport evaluate_model(Model& model, const std::vector<Sequence>& data, ModalityMask mask) {
  std::vector<SequenceReport> reports;
  for (const Sequence& seq : data) {
    std::vector<ImageBox> gts;
    for (const Frame& f : seq.frames) gts.push_back(f.gt);
    reports.push_back(evaluate(track_sequence(seq, model, mask), gts, seq.name));
  }
  return aggregate(std::move(reports));
}

std::string to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kAlpha: return "alpha";
    case SweepAxis::kMfpgLayers: return "mfpg-layers";
    case SweepAxis::kPromptLayers: return "prompt-layers";
    case SweepAxis::kFftMode: return "fft-mode";
  }
  return "?";
}

SweepAxis parse_sweep_axis(const std::string& s) {
  for (SweepAxis a : {SweepAxis::kAlpha, SweepAxis::kMfpgLayers, SweepAxis::kPromptLayers, SweepAxis::kFftMode}) {
    if (to_string(a) == s) return a;
  }
  throw ConfigError("unknown sweep axis '" + s + "' (expected alpha, mfpg-layers, prompt-layers or fft-mode)");
}

std::vector<SweepPoint> sweep_points(SweepAxis axis, const Config& base) {
  base.validate();
  std::vector<SweepPoint> points;
  const std::size_t n = base.encoder.layers;
  std::vector<LayerSelection> placements;
  if (n >= 2) {
    placements = {LayerSelection::range(1, n / 2), LayerSelection::range(n / 2 + 1, n), LayerSelection::range(1, n)};
  } else {
    placements = {LayerSelection::range(1, n)};
  }
  switch (axis) {
    case SweepAxis::kAlpha:
      for (int k = 0; k <= 10; ++k) {
        Config c = base;
        c.prompt.alpha = k / 10.0;
        char buf[16];
        std::snprintf(buf, sizeof buf, "%.1f", c.prompt.alpha);
        points.push_back({buf, c});
      }
      break;
    case SweepAxis::kMfpgLayers:
      for (const LayerSelection& sel : placements) {
        Config c = base;
        c.mfpg.layers = sel;
        points.push_back({sel.to_string(), c});
      }
      break;
    case SweepAxis::kPromptLayers:
      for (const LayerSelection& sel : placements) {
        Config c = base;
        c.prompt.layers = sel;
        points.push_back({sel.to_string(), c});
      }
      break;
    case SweepAxis::kFftMode:
      for (FftMode m : {FftMode::kChannelOnly, FftMode::kSpatialOnly, FftMode::kBoth}) {
        Config c = base;
        c.prompt.fft_mode = m;
        points.push_back({to_string(m), c});
      }
      break;
  }
  for (SweepPoint& p : points) p.config.validate();
  return points;
}

std::vector<SweepRow> run_sweep(SweepAxis axis, const Config& base, const std::vector<Sequence>& data) {
  std::vector<SweepRow> rows;
  for (const SweepPoint& p : sweep_points(axis, base)) {
    Trainer trainer(p.config, data);
    trainer.run();
    const EvalReport r = evaluate_model(trainer.model(), data);
    rows.push_back({p.value, r.overall.sr, r.overall.pr, r.overall.npr});
  }
  return rows;
}

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows) {
  std::ofstream out(path);
  if (!out) throw Error(path.string() + ": cannot open for writing");
  out << "value,SR,PR,NPR\n";
  char buf[128];
  for (const SweepRow& r : rows) {
    std::snprintf(buf, sizeof buf, ",%.6f,%.6f,%.6f\n", r.sr, r.pr, r.npr);
    out << r.value << buf;
  }
  if (!out) throw Error(path.string() + ": write failed");
}

}  // namespace vfpt
