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

#include "vfpt/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

namespace vfpt {

namespace {

long source_index(double origin, double side, std::size_t out, std::size_t u) {
  return static_cast<long>(std::floor(origin + (static_cast<double>(u) + 0.5) * side / static_cast<double>(out)));
}

[[noreturn]] void bad(const std::filesystem::path& path, std::size_t offset, const std::string& what) {
  throw ParseError(path.string() + ": byte " + std::to_string(offset) + ": " + what);
}

class PnmCursor {
 public:
  PnmCursor(const std::filesystem::path& path, const std::vector<unsigned char>& bytes)
      : path_(path), bytes_(bytes) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::size_t number(const char* what) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    std::size_t v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + static_cast<std::size_t>(bytes_[pos_] - '0');
      if (v > 1u << 20) bad(path_, start, std::string(what) + " is too large");
      ++pos_;
    }
    if (pos_ == start) bad(path_, start, std::string("expected ") + what);
    return v;
  }

  std::size_t pos() const { return pos_; }
  void advance(std::size_t n) { pos_ += n; }

 private:
  const std::filesystem::path& path_;
  const std::vector<unsigned char>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

Tensor crop_resize(const Tensor& img, double cx, double cy, double side, std::size_t out, CropInfo* info) {
  if (img.rank() != 3) throw DimensionError("crop_resize expects [C, H, W], got " + shape_str(img.shape()));
  if (!(side > 0.0) || out == 0) throw DimensionError("crop_resize needs a positive side and output size");
  const std::size_t c = img.dim(0), h = img.dim(1), w = img.dim(2);
  const double x0 = cx - 0.5 * side, y0 = cy - 0.5 * side;
  std::vector<std::size_t> cols(out), rows(out);
  std::size_t inside_cols = 0, inside_rows = 0;
  for (std::size_t u = 0; u < out; ++u) {
    const long x = source_index(x0, side, out, u);
    const long y = source_index(y0, side, out, u);
    inside_cols += (x >= 0 && x < static_cast<long>(w)) ? 1 : 0;
    inside_rows += (y >= 0 && y < static_cast<long>(h)) ? 1 : 0;
    cols[u] = static_cast<std::size_t>(std::clamp<long>(x, 0, static_cast<long>(w) - 1));
    rows[u] = static_cast<std::size_t>(std::clamp<long>(y, 0, static_cast<long>(h) - 1));
  }
  Tensor res({c, out, out});
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t v = 0; v < out; ++v)
      for (std::size_t u = 0; u < out; ++u) res.at(ch, v, u) = img.at(ch, rows[v], cols[u]);
  if (info != nullptr) *info = {x0, y0, side, out * out - inside_cols * inside_rows};
  return res;
}

Tensor replicate_channels(const Tensor& gray) {
  if (gray.rank() != 3 || gray.dim(0) != 1) {
    throw DimensionError("replicate_channels expects [1, H, W], got " + shape_str(gray.shape()));
  }
  const std::size_t n = gray.size();
  Tensor out({3, gray.dim(1), gray.dim(2)});
  for (std::size_t c = 0; c < 3; ++c) std::copy(gray.ptr(), gray.ptr() + n, out.ptr() + c * n);
  return out;
}

unsigned char quantize(double v) {
  const double s = std::round(std::clamp(v, 0.0, 1.0) * 255.0);
  return static_cast<unsigned char>(s);
}

Tensor read_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string() + ": cannot open");
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    bad(path, 0, "expected P5 or P6 magic");
  }
  const std::size_t channels = bytes[1] == '6' ? 3 : 1;
  PnmCursor cur(path, bytes);
  cur.advance(2);
  const std::size_t w = cur.number("width");
  const std::size_t h = cur.number("height");
  const std::size_t maxval_at = cur.pos();
  const std::size_t maxval = cur.number("maxval");
  if (w == 0 || h == 0) bad(path, maxval_at, "zero image extent");
  if (maxval != 255) bad(path, maxval_at, "only maxval 255 is supported, got " + std::to_string(maxval));
  if (cur.pos() >= bytes.size() || !std::isspace(bytes[cur.pos()])) bad(path, cur.pos(), "expected whitespace after maxval");
  cur.advance(1);
  const std::size_t start = cur.pos();
  const std::size_t need = channels * w * h;
  if (bytes.size() - start < need) {
    bad(path, bytes.size(), "truncated pixel data: expected " + std::to_string(need) + " bytes from offset " +
                                std::to_string(start) + ", file ends early");
  }
  Tensor img({channels, h, w});
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      for (std::size_t c = 0; c < channels; ++c)
        img.at(c, y, x) = static_cast<double>(bytes[start + (y * w + x) * channels + c]) / 255.0;
  return img;
}

void write_pnm(const std::filesystem::path& path, const Tensor& img) {
  if (img.rank() != 3 || (img.dim(0) != 1 && img.dim(0) != 3)) {
    throw DimensionError("write_pnm expects [1|3, H, W], got " + shape_str(img.shape()));
  }
  const std::size_t c = img.dim(0), h = img.dim(1), w = img.dim(2);
  std::string data = (c == 3 ? "P6\n" : "P5\n") + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  const std::size_t header = data.size();
  data.resize(header + c * w * h);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      for (std::size_t ch = 0; ch < c; ++ch)
        data[header + (y * w + x) * c + ch] = static_cast<char>(quantize(img.at(ch, y, x)));
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(path.string() + ": cannot open for writing");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error(path.string() + ": write failed");
}

}  // namespace vfpt
