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

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "vfpt/autograd.hpp"
#include "vfpt/tensor.hpp"

namespace vfpt {

// Complex array stored as separate real/imaginary planes of one shape.
struct ComplexTensor {
  Shape shape;
  std::vector<double> re;
  std::vector<double> im;

  ComplexTensor() = default;
  explicit ComplexTensor(Shape s);
  static ComplexTensor from_real(const Tensor& t);

  std::size_t size() const { return re.size(); }
  std::complex<double> get(std::size_t i) const { return {re[i], im[i]}; }
  void set(std::size_t i, std::complex<double> v) {
    re[i] = v.real();
    im[i] = v.imag();
  }

  Tensor real() const;
  Tensor magnitude() const;
};

double max_abs_diff(const ComplexTensor& a, const ComplexTensor& b);

// X[k] = sum_n x[n] exp(-2 pi i k n / N) along `axis`, by direct double loop.
// O(N^2); the reference the fast path is checked against.
ComplexTensor dft_1d_naive(const ComplexTensor& x, std::size_t axis);

// Mixed-radix Cooley-Tukey transform (unnormalised, forward sign). Lengths
// are factored into primes; prime-length stages fall back to a direct DFT.
class FftEngine {
 public:
  // A nonzero phase error (radians) is added to every non-trivial twiddle
  // factor. Only used to prove that the verification suites detect a broken
  // transform.
  explicit FftEngine(double twiddle_phase_error = 0.0) : phase_error_(twiddle_phase_error) {}

  ComplexTensor transform(const ComplexTensor& x, std::size_t axis) const;
  void transform_line(std::vector<std::complex<double>>& line) const;

 private:
  void recurse(const std::complex<double>* in, std::size_t stride, std::size_t n,
               std::complex<double>* out) const;
  std::complex<double> twiddle(std::size_t exponent, std::size_t n) const;

  double phase_error_;
};

ComplexTensor fft_1d(const ComplexTensor& x, std::size_t axis);

// Which axes of a [tokens, channels] prompt block are transformed.
enum class FftMode { kChannelOnly, kSpatialOnly, kBoth };
// How the complex spectrum is mapped back to reals.
enum class FftOutput { kReal, kMagnitude };

std::string to_string(FftMode mode);
std::string to_string(FftOutput out);
FftMode parse_fft_mode(const std::string& s);
FftOutput parse_fft_output(const std::string& s);

// Re(FFT over tokens(FFT over channels(T))) for T[m, c].
Tensor fourier_prompt(const Tensor& t);
Tensor fourier_prompt_variant(const Tensor& t, FftMode mode, FftOutput output = FftOutput::kReal);

// Differentiable form. The real-part map is linear and symmetric, so its
// gradient is the same map applied to the upstream gradient. The magnitude
// map uses subgradient 0 at zero-modulus bins.
Var fourier_prompt_op(Var t, FftMode mode, FftOutput output);

}  // namespace vfpt
