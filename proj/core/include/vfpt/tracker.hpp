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
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "vfpt/config.hpp"
#include "vfpt/encoder.hpp"
#include "vfpt/geometry.hpp"
#include "vfpt/image.hpp"
#include "vfpt/model.hpp"
#include "vfpt/synth.hpp"
#include "vfpt/tensor.hpp"

namespace vfpt {

// Which modality inputs reach the network; the other is zeroed.
enum class ModalityMask { kBoth, kRgbOnly, kTirOnly };

std::string to_string(ModalityMask m);
ModalityMask parse_modality_mask(const std::string& s);

// Model-ready crop pair around a centre: RGB as is, TIR replicated to three
// channels, masked modality zeroed.
struct CropPair {
  Tensor rgb;
  Tensor tir;
  CropInfo info;
};

CropPair crop_pair(const Tensor& rgb, const Tensor& tir, double cx, double cy, double side, std::size_t out,
                   ModalityMask mask);

struct TrackState {
  Tensor template_rgb;  // [3, Z, Z]
  Tensor template_tir;
  ImageBox box;
  std::size_t image_w = 0;
  std::size_t image_h = 0;
  double search_factor = 4.0;
  double gamma = 0.49;
  ModalityMask mask = ModalityMask::kBoth;
};

TrackState track_init(const Config& cfg, const Tensor& rgb, const Tensor& tir, const ImageBox& gt0,
                      ModalityMask mask = ModalityMask::kBoth);

// 0.5 (1 - cos(2 pi k / (n + 1))) for k = 1..n.
std::vector<double> hann_window(std::size_t n);

// (1 - gamma) score + gamma (hann_rows x hann_cols).
Tensor hanning_penalty(const Tensor& score, double gamma);

// Search-crop box (normalised) -> image box, and back.
ImageBox to_image(const BBox& b, const CropInfo& crop);
BBox to_normalized(const ImageBox& b, const CropInfo& crop);

// Keeps at least one pixel of extent inside the image.
ImageBox clamp_to_image(const ImageBox& b, std::size_t w, std::size_t h);

struct FrameResult {
  ImageBox box;
  Tensor penalized_score;  // [Hs, Ws]
};

FrameResult track_frame(TrackState& state, const Tensor& rgb, const Tensor& tir, Model& model);

// Frame 0 reports the initial box; later frames are tracked.
using ScoreSink = std::function<void(std::size_t frame, const Tensor& penalized_score)>;
std::vector<ImageBox> track_sequence(const Sequence& seq, Model& model, ModalityMask mask = ModalityMask::kBoth,
                                     const ScoreSink& sink = {});

// frame_idx,x,y,w,h per line.
void write_results(const std::filesystem::path& path, const std::vector<ImageBox>& boxes);
std::vector<ImageBox> read_results(const std::filesystem::path& path);

// Score map scaled to 8 bits.
void write_score_map(const std::filesystem::path& path, const Tensor& score);

}  // namespace vfpt
