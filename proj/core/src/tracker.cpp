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

#include "vfpt/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "text_util.hpp"
#include "vfpt/head.hpp"

namespace vfpt {

std::string to_string(ModalityMask m) {
  switch (m) {
    case ModalityMask::kRgbOnly: return "rgb";
    case ModalityMask::kTirOnly: return "tir";
    default: return "both";
  }
}

ModalityMask parse_modality_mask(const std::string& s) {
  if (s == "both") return ModalityMask::kBoth;
  if (s == "rgb") return ModalityMask::kRgbOnly;
  if (s == "tir") return ModalityMask::kTirOnly;
  throw ConfigError("modality must be both, rgb or tir, got '" + s + "'");
}

CropPair crop_pair(const Tensor& rgb, const Tensor& tir, double cx, double cy, double side, std::size_t out,
                   ModalityMask mask) {
  CropPair p;
  p.rgb = crop_resize(rgb, cx, cy, side, out, &p.info);
  p.tir = replicate_channels(crop_resize(tir, cx, cy, side, out));
  if (mask == ModalityMask::kTirOnly) p.rgb.fill(0.0);
  if (mask == ModalityMask::kRgbOnly) p.tir.fill(0.0);
  return p;
}

TrackState track_init(const Config& cfg, const Tensor& rgb, const Tensor& tir, const ImageBox& gt0,
                      ModalityMask mask) {
  if (rgb.rank() != 3 || rgb.dim(0) != 3) throw DimensionError("track_init: RGB frame must be [3, H, W]");
  if (tir.rank() != 3 || tir.dim(0) != 1 || tir.dim(1) != rgb.dim(1) || tir.dim(2) != rgb.dim(2)) {
    throw DimensionError("track_init: TIR frame must be [1, H, W] matching RGB");
  }
  if (!(gt0.w > 0.0) || !(gt0.h > 0.0)) throw ConfigError("track_init: initial box must have positive size");
  TrackState s;
  s.image_w = rgb.dim(2);
  s.image_h = rgb.dim(1);
  s.search_factor = cfg.track.search_factor;
  s.gamma = cfg.track.gamma;
  s.mask = mask;
  s.box = gt0;
  const CropPair z = crop_pair(rgb, tir, gt0.cx(), gt0.cy(), gt0.context_side(cfg.track.template_factor),
                               cfg.encoder.template_size, mask);
  s.template_rgb = z.rgb;
  s.template_tir = z.tir;
  return s;
}

std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t k = 1; k <= n; ++k) {
    w[k - 1] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n + 1)));
  }
  return w;
}

Tensor hanning_penalty(const Tensor& score, double gamma) {
  if (score.rank() != 2) throw DimensionError("hanning_penalty expects [Hs, Ws], got " + shape_str(score.shape()));
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("hanning_penalty: gamma must lie in [0, 1]");
  const std::vector<double> hr = hann_window(score.dim(0)), hc = hann_window(score.dim(1));
  Tensor out(score.shape());
  for (std::size_t i = 0; i < score.dim(0); ++i)
    for (std::size_t j = 0; j < score.dim(1); ++j)
      out.at(i, j) = (1.0 - gamma) * score.at(i, j) + gamma * hr[i] * hc[j];
  return out;
}

ImageBox to_image(const BBox& b, const CropInfo& crop) {
  return {crop.x0 + b.x1() * crop.side, crop.y0 + b.y1() * crop.side, b.w * crop.side, b.h * crop.side};
}

BBox to_normalized(const ImageBox& b, const CropInfo& crop) {
  return {(b.cx() - crop.x0) / crop.side, (b.cy() - crop.y0) / crop.side, b.w / crop.side, b.h / crop.side};
}

ImageBox clamp_to_image(const ImageBox& b, std::size_t w, std::size_t h) {
  const double wd = static_cast<double>(w), hd = static_cast<double>(h);
  const double x1 = std::clamp(b.x, 0.0, wd - 1.0);
  const double y1 = std::clamp(b.y, 0.0, hd - 1.0);
  const double x2 = std::clamp(b.x + b.w, x1 + 1.0, wd);
  const double y2 = std::clamp(b.y + b.h, y1 + 1.0, hd);
  return {x1, y1, x2 - x1, y2 - y1};
}

FrameResult track_frame(TrackState& state, const Tensor& rgb, const Tensor& tir, Model& model) {
  if (state.template_rgb.empty()) throw ProtocolError("track_frame called before track_init");
  const Config& cfg = model.config;
  const CropPair x = crop_pair(rgb, tir, state.box.cx(), state.box.cy(), state.box.context_side(state.search_factor),
                               cfg.encoder.search_size, state.mask);
  const DualInputs in{state.template_rgb, x.rgb, state.template_tir, x.tir};
  HeadOutputs out = predict(model, in);
  out.score = hanning_penalty(out.score, state.gamma);
  const BBox b = decode_box(out);
  state.box = clamp_to_image(to_image(b, x.info), state.image_w, state.image_h);
  return {state.box, std::move(out.score)};
}

std::vector<ImageBox> track_sequence(const Sequence& seq, Model& model, ModalityMask mask, const ScoreSink& sink) {
  if (seq.frames.empty()) return {};
  const Frame& f0 = seq.frames.front();
  TrackState state = track_init(model.config, f0.rgb, f0.tir, f0.gt, mask);
  std::vector<ImageBox> boxes{f0.gt};
  for (std::size_t t = 1; t < seq.frames.size(); ++t) {
    FrameResult r = track_frame(state, seq.frames[t].rgb, seq.frames[t].tir, model);
    if (sink) sink(t, r.penalized_score);
    boxes.push_back(r.box);
  }
  return boxes;
}

void write_results(const std::filesystem::path& path, const std::vector<ImageBox>& boxes) {
  std::ofstream out(path);
  if (!out) throw Error(path.string() + ": cannot open for writing");
  for (std::size_t t = 0; t < boxes.size(); ++t) {
    const ImageBox& b = boxes[t];
    out << t << ',' << detail::fmt_double(b.x) << ',' << detail::fmt_double(b.y) << ',' << detail::fmt_double(b.w)
        << ',' << detail::fmt_double(b.h) << '\n';
  }
}

std::vector<ImageBox> read_results(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string() + ": cannot open");
  std::vector<ImageBox> boxes;
  std::string line;
  std::size_t offset = 0;
  while (std::getline(in, line)) {
    const std::size_t start = offset;
    offset += line.size() + 1;
    if (detail::trim(line).empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) f.push_back(detail::trim(item));
    try {
      if (f.size() != 5) throw ConfigError("expected frame_idx,x,y,w,h");
      if (detail::to_size("frame_idx", f[0]) != boxes.size()) {
        throw ConfigError("expected frame " + std::to_string(boxes.size()));
      }
      boxes.push_back({detail::to_double("x", f[1]), detail::to_double("y", f[2]), detail::to_double("w", f[3]),
                       detail::to_double("h", f[4])});
    } catch (const ConfigError& e) {
      throw ParseError(path.string() + ": byte " + std::to_string(start) + ": " + e.what());
    }
  }
  return boxes;
}

void write_score_map(const std::filesystem::path& path, const Tensor& score) {
  if (score.rank() != 2) throw DimensionError("score map must be [Hs, Ws]");
  write_pnm(path, score.reshaped({1, score.dim(0), score.dim(1)}));
}

}  // namespace vfpt
