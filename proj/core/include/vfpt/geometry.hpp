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

#include <cmath>

namespace vfpt {

// Centre/size box in normalised search-region coordinates ([0, 1]^2).
struct BBox {
  double cx = 0.5;
  double cy = 0.5;
  double w = 0.0;
  double h = 0.0;

  double x1() const { return cx - 0.5 * w; }
  double y1() const { return cy - 0.5 * h; }
  double x2() const { return cx + 0.5 * w; }
  double y2() const { return cy + 0.5 * h; }

  static BBox from_corners(double x1, double y1, double x2, double y2) {
    return {0.5 * (x1 + x2), 0.5 * (y1 + y2), x2 - x1, y2 - y1};
  }

  friend bool operator==(const BBox&, const BBox&) = default;
};

// Top-left/size box in image pixel coordinates.
struct ImageBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double cx() const { return x + 0.5 * w; }
  double cy() const { return y + 0.5 * h; }
  double area() const { return (w > 0 && h > 0) ? w * h : 0.0; }
  // Side of the square context region around the box.
  double context_side(double factor) const { return factor * std::sqrt(w * h); }

  friend bool operator==(const ImageBox&, const ImageBox&) = default;
};

}  // namespace vfpt
