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

#include "vfpt/fourier.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace vfpt {

using cd = std::complex<double>;

ComplexTensor::ComplexTensor(Shape s) : shape(std::move(s)) {
  const std::size_t n = shape_size(shape);
  re.assign(n, 0.0);
  im.assign(n, 0.0);
}

ComplexTensor ComplexTensor::from_real(const Tensor& t) {
  ComplexTensor c(t.shape());
  std::copy(t.data().begin(), t.data().end(), c.re.begin());
  return c;
}

Tensor ComplexTensor::real() const { return Tensor(shape, re); }

Tensor ComplexTensor::magnitude() const {
  Tensor out(shape);
  for (std::size_t i = 0; i < re.size(); ++i) out[i] = std::hypot(re[i], im[i]);
  return out;
}

double max_abs_diff(const ComplexTensor& a, const ComplexTensor& b) {
  if (a.shape != b.shape) {
    throw DimensionError("complex shape mismatch " + shape_str(a.shape) + " vs " + shape_str(b.shape));
  }
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.get(i) - b.get(i)));
  return m;
}

namespace {

struct Lines {
  std::size_t outer = 1, len = 1, inner = 1;
};

Lines lines_along(const Shape& shape, std::size_t axis) {
  if (axis >= shape.size()) {
    throw DimensionError("axis " + std::to_string(axis) + " invalid for " + shape_str(shape));
  }
  Lines l;
  for (std::size_t i = 0; i < axis; ++i) l.outer *= shape[i];
  l.len = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) l.inner *= shape[i];
  return l;
}

std::size_t smallest_prime_factor(std::size_t n) {
  for (std::size_t p = 2; p * p <= n; ++p)
    if (n % p == 0) return p;
  return n;
}

template <typename LineFn>
ComplexTensor map_lines(const ComplexTensor& x, std::size_t axis, LineFn&& fn) {
  const Lines l = lines_along(x.shape, axis);
  ComplexTensor out(x.shape);
  std::vector<cd> line(l.len);
  for (std::size_t o = 0; o < l.outer; ++o) {
    for (std::size_t in = 0; in < l.inner; ++in) {
      const std::size_t base = o * l.len * l.inner + in;
      for (std::size_t k = 0; k < l.len; ++k) line[k] = x.get(base + k * l.inner);
      fn(line);
      for (std::size_t k = 0; k < l.len; ++k) out.set(base + k * l.inner, line[k]);
    }
  }
  return out;
}

}  // namespace

ComplexTensor dft_1d_naive(const ComplexTensor& x, std::size_t axis) {
  return map_lines(x, axis, [](std::vector<cd>& line) {
    const std::size_t n = line.size();
    std::vector<cd> out(n);
    for (std::size_t k = 0; k < n; ++k) {
      cd acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double angle = -2.0 * std::numbers::pi * static_cast<double>((k * j) % n) / static_cast<double>(n);
        acc += line[j] * cd(std::cos(angle), std::sin(angle));
      }
      out[k] = acc;
    }
    line = std::move(out);
  });
}

cd FftEngine::twiddle(std::size_t exponent, std::size_t n) const {
  exponent %= n;
  if (exponent == 0) return {1.0, 0.0};
  const double angle =
      -2.0 * std::numbers::pi * static_cast<double>(exponent) / static_cast<double>(n) + phase_error_;
  return {std::cos(angle), std::sin(angle)};
}

void FftEngine::recurse(const cd* in, std::size_t stride, std::size_t n, cd* out) const {
  if (n == 1) {
    out[0] = in[0];
    return;
  }
  const std::size_t p = smallest_prime_factor(n);
  if (p == n) {
    for (std::size_t k = 0; k < n; ++k) {
      cd acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += in[j * stride] * twiddle(j * k, n);
      out[k] = acc;
    }
    return;
  }
  // Decimation in time: p interleaved sub-sequences of length q.
  const std::size_t q = n / p;
  for (std::size_t r = 0; r < p; ++r) recurse(in + r * stride, stride * p, q, out + r * q);
  std::vector<cd> merged(n);
  for (std::size_t k = 0; k < q; ++k) {
    for (std::size_t s = 0; s < p; ++s) {
      const std::size_t bin = k + q * s;
      cd acc = 0.0;
      for (std::size_t r = 0; r < p; ++r) acc += twiddle(r * bin, n) * out[r * q + k];
      merged[bin] = acc;
    }
  }
  std::copy(merged.begin(), merged.end(), out);
}

void FftEngine::transform_line(std::vector<cd>& line) const {
  std::vector<cd> out(line.size());
  if (!line.empty()) recurse(line.data(), 1, line.size(), out.data());
  line = std::move(out);
}

ComplexTensor FftEngine::transform(const ComplexTensor& x, std::size_t axis) const {
  return map_lines(x, axis, [this](std::vector<cd>& line) { transform_line(line); });
}

ComplexTensor fft_1d(const ComplexTensor& x, std::size_t axis) { return FftEngine{}.transform(x, axis); }

std::string to_string(FftMode mode) {
  switch (mode) {
    case FftMode::kChannelOnly:
      return "channel-only";
    case FftMode::kSpatialOnly:
      return "spatial-only";
    case FftMode::kBoth:
      return "both";
  }
  return "both";
}

std::string to_string(FftOutput out) { return out == FftOutput::kReal ? "real" : "magnitude"; }

FftMode parse_fft_mode(const std::string& s) {
  if (s == "channel-only") return FftMode::kChannelOnly;
  if (s == "spatial-only") return FftMode::kSpatialOnly;
  if (s == "both") return FftMode::kBoth;
  throw ConfigError("fft_mode must be channel-only, spatial-only or both, got '" + s + "'");
}

FftOutput parse_fft_output(const std::string& s) {
  if (s == "real") return FftOutput::kReal;
  if (s == "magnitude") return FftOutput::kMagnitude;
  throw ConfigError("fft_output must be real or magnitude, got '" + s + "'");
}

namespace {

// Channel axis first, then the token axis.
ComplexTensor spectrum(const ComplexTensor& x, FftMode mode) {
  if (x.shape.size() != 2) throw DimensionError("prompt block must be [m, c], got " + shape_str(x.shape));
  ComplexTensor c = x;
  if (mode != FftMode::kSpatialOnly) c = fft_1d(c, 1);
  if (mode != FftMode::kChannelOnly) c = fft_1d(c, 0);
  return c;
}

}  // namespace

Tensor fourier_prompt(const Tensor& t) { return fourier_prompt_variant(t, FftMode::kBoth); }

Tensor fourier_prompt_variant(const Tensor& t, FftMode mode, FftOutput output) {
  const ComplexTensor c = spectrum(ComplexTensor::from_real(t), mode);
  return output == FftOutput::kReal ? c.real() : c.magnitude();
}

Var fourier_prompt_op(Var t, FftMode mode, FftOutput output) {
  ComplexTensor z = spectrum(ComplexTensor::from_real(t.value()), mode);
  Tensor y = output == FftOutput::kReal ? z.real() : z.magnitude();
  return t.tape().record(std::move(y), t.requires_grad(), [t, mode, output, z = std::move(z)](const Tensor& g) {
    ComplexTensor w(g.shape());
    if (output == FftOutput::kReal) {
      std::copy(g.data().begin(), g.data().end(), w.re.begin());
    } else {
      for (std::size_t i = 0; i < w.size(); ++i) {
        const double mod = std::abs(z.get(i));
        if (mod > 0.0) w.set(i, g[i] * std::conj(z.get(i)) / mod);
      }
    }
    // The DFT matrix is symmetric, so A^T w == A w.
    const ComplexTensor back = spectrum(w, mode);
    Tensor& dt = t.tape().grad_slot(t);
    for (std::size_t i = 0; i < dt.size(); ++i) dt[i] += back.re[i];
  });
}

}  // namespace vfpt
