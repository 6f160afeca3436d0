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

#include "vfpt/tensor.hpp"

namespace vfpt {

struct CropInfo {
  double x0 = 0.0;  // top-left of the crop window in source pixels
  double y0 = 0.0;
  double side = 0.0;
  std::size_t padded_pixels = 0;  // output pixels sampled from outside the image
};

// Square window of `side` source pixels centred on (cx, cy), resampled to
// out x out by nearest neighbour. Output pixel u samples source column
// floor(x0 + (u + 0.5) side / out); samples outside the image take the
// nearest edge pixel.
Tensor crop_resize(const Tensor& img, double cx, double cy, double side, std::size_t out, CropInfo* info = nullptr);

// [1, H, W] -> [3, H, W].
Tensor replicate_channels(const Tensor& gray);

// Binary P6 ([3, H, W]) or P5 ([1, H, W]), maxval 255, values in [0, 1].
Tensor read_pnm(const std::filesystem::path& path);
void write_pnm(const std::filesystem::path& path, const Tensor& img);

// 8-bit quantisation used by write_pnm.
unsigned char quantize(double v);

}  // namespace vfpt
