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
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "vfpt/errors.hpp"

namespace vfpt {

using Shape = std::vector<std::size_t>;

std::string shape_str(const Shape& shape);
std::size_t shape_size(const Shape& shape);

// Dense row-major array of doubles. A default-constructed tensor is empty
// (no shape, no data); every constructed tensor has positive extents.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor scalar(double v) { return Tensor({1}, std::vector<double>{v}); }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  double* ptr() { return data_.data(); }
  const double* ptr() const { return data_.data(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double& at(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
  double at(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }
  double& at(std::size_t i, std::size_t j, std::size_t k) {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }
  double at(std::size_t i, std::size_t j, std::size_t k) const {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }

  // Same data, new shape with identical element count.
  Tensor reshaped(Shape shape) const;

  void fill(double v);
  Tensor& operator+=(const Tensor& other);

  // Bitwise-equal shape and payload.
  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  Shape shape_;
  std::vector<double> data_;
};

void require_shape(const Tensor& t, const Shape& expected, const char* what);
void require_same_shape(const Tensor& a, const Tensor& b, const char* what);
bool all_finite(const Tensor& t);
double max_abs_diff(const Tensor& a, const Tensor& b);

// Binary tensor record: "VFPT", u32 rank, u32 extents, little-endian f64.
void write_tensor(std::ostream& out, const Tensor& t);
Tensor read_tensor(std::istream& in);

// Little-endian scalar helpers shared by the binary formats.
void write_u32(std::ostream& out, std::uint32_t v);
void write_u64(std::ostream& out, std::uint64_t v);
std::uint32_t read_u32(std::istream& in);
std::uint64_t read_u64(std::istream& in);

// A named tensor that may or may not be updated by the optimizer.
struct Param {
  std::string name;
  Tensor value;
  Tensor grad;
  bool trainable = false;

  Param() = default;
  Param(std::string n, Tensor v, bool is_trainable)
      : name(std::move(n)), value(std::move(v)), grad(value.shape()), trainable(is_trainable) {}

  void zero_grad() { grad.fill(0.0); }
  std::size_t size() const { return value.size(); }
};

}  // namespace vfpt
