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
#include <string>
#include <vector>

#include "vfpt/geometry.hpp"

namespace vfpt {

double iou(const ImageBox& a, const ImageBox& b);
// Euclidean centre distance, pixels.
double center_error(const ImageBox& pred, const ImageBox& gt);
// Centre distance with each axis divided by the gt width / height.
double norm_center_error(const ImageBox& pred, const ImageBox& gt);

inline constexpr double kPrecisionThreshold = 20.0;      // pixels
inline constexpr double kNormPrecisionThreshold = 0.2;

// 0, 0.05, ..., 1.
std::vector<double> success_thresholds();
// 0, 1, ..., 50 pixels.
std::vector<double> precision_thresholds();
// 0, 0.01, ..., 0.5.
std::vector<double> norm_precision_thresholds();

struct SequenceReport {
  std::string name;
  std::size_t frames = 0;
  double sr = 0.0;
  double pr = 0.0;
  double npr = 0.0;
  std::vector<double> success;         // fraction with IoU > tau (>= at tau = 1)
  std::vector<double> precision;       // fraction with centre error <= t
  std::vector<double> norm_precision;  // fraction with normalised error <= t
};

struct EvalReport {
  std::vector<SequenceReport> sequences;
  SequenceReport overall;  // frame-weighted
};

SequenceReport evaluate(const std::vector<ImageBox>& preds, const std::vector<ImageBox>& gts,
                        const std::string& name = "sequence");
EvalReport aggregate(std::vector<SequenceReport> sequences);

// key=value text at `path` plus <stem>_success.csv, <stem>_precision.csv and
// <stem>_norm_precision.csv (threshold,value) next to it.
void write_report(const EvalReport& report, const std::filesystem::path& path, const std::string& header = "");

}  // namespace vfpt
