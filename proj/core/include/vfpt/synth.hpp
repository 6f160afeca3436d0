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
#include <filesystem>
#include <string>
#include <vector>

#include "vfpt/geometry.hpp"
#include "vfpt/tensor.hpp"

namespace vfpt {

// Inclusive frame range.
struct EventWindow {
  std::size_t first = 0;
  std::size_t last = 0;

  bool contains(std::size_t t) const { return t >= first && t <= last; }
  friend bool operator==(const EventWindow&, const EventWindow&) = default;
};

struct Waypoint {
  std::size_t frame = 0;
  double cx = 0.0;  // target centre, pixels
  double cy = 0.0;
  friend bool operator==(const Waypoint&, const Waypoint&) = default;
};

enum class TargetShape { kRectangle, kDisc };

enum FrameFlags : unsigned {
  kFlagDark = 1u,
  kFlagCrossover = 2u,
  kFlagOccluded = 4u,
};

struct SyntheticSpec {
  std::size_t length = 30;
  std::size_t width = 128;
  std::size_t height = 96;
  TargetShape shape = TargetShape::kRectangle;
  double target_w = 20.0;
  double target_h = 16.0;
  // Empty: drawn from the seed, one every 10 frames plus the last frame.
  std::vector<Waypoint> waypoints;
  double jitter = 0.5;  // per-frame centre noise, pixels; none at waypoint frames
  std::size_t distractors = 2;
  std::vector<EventWindow> darkness;   // RGB contrast x0.05
  std::vector<EventWindow> crossover;  // TIR target equals background
  std::vector<EventWindow> occlusion;  // opaque box over the target in both
  double noise_rgb = 0.02;
  double noise_tir = 0.02;
  std::uint64_t seed = 1;

  void validate() const;
  std::string to_text() const;
  static SyntheticSpec parse(const std::string& text, const std::string& source = "<spec>");
  static SyntheticSpec load(const std::filesystem::path& path);
  friend bool operator==(const SyntheticSpec&, const SyntheticSpec&) = default;
};

struct Frame {
  Tensor rgb;  // [3, H, W] in [0, 1]
  Tensor tir;  // [1, H, W] in [0, 1]
  ImageBox gt;
  unsigned flags = 0;
};

struct Sequence {
  std::string name;
  SyntheticSpec spec;
  std::vector<Frame> frames;
};

// Waypoints actually used (explicit or drawn from the seed).
std::vector<Waypoint> resolve_waypoints(const SyntheticSpec& spec);

// Piecewise-linear target centre at frame t, before jitter.
std::pair<double, double> interpolate(const std::vector<Waypoint>& waypoints, std::size_t t);

Sequence generate(const SyntheticSpec& spec, const std::string& name = "synthetic");

// rgb/%06d.ppm, tir/%06d.pgm, gt.txt (frame_idx,x,y,w,h,flags), spec.txt.
void save_sequence(const Sequence& seq, const std::filesystem::path& dir);
Sequence load_sequence(const std::filesystem::path& dir);

// Either one sequence directory (holding gt.txt) or a directory of them,
// loaded in name order.
std::vector<Sequence> load_dataset(const std::filesystem::path& dir);

std::string frame_file(std::size_t t, const char* ext);

}  // namespace vfpt
