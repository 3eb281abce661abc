// Copyright 2026 The VCAE Authors
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
#include <initializer_list>
#include <span>
#include <new>
#include <string>
#include <vector>

namespace vcae {

/// Cache-line aligned allocator. Vectorized kernels peel differently
/// depending on the address, so a fixed alignment keeps floating-point
/// reductions identical from run to run.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlign{64};

  AlignedAllocator() = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlign)); }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, kAlign); }

  template <typename U>
  bool operator==(const AlignedAllocator<U>&) const noexcept {
    return true;
  }
};

/// Dense row-major array of doubles with an explicit shape.
///
/// Most of the library works with rank-2 tensors laid out as [batch, units];
/// rank-1 tensors hold biases and per-row reductions.
class Tensor {
 public:
  using Shape = std::vector<std::size_t>;
  using Storage = std::vector<double, AlignedAllocator<double>>;

  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::span<const double> data);
  Tensor(Shape shape, Storage data);

  static Tensor vector(std::initializer_list<double> values);
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor zeros_like(const Tensor& other) { return Tensor(other.shape_); }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  // Row view: rank 1 is a single row, rank >= 2 folds trailing dims into columns.
  std::size_t rows() const;
  std::size_t cols() const;

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  Storage& storage() noexcept { return data_; }
  const Storage& storage() const noexcept { return data_; }

  std::span<double> row(std::size_t r);
  std::span<const double> row(std::size_t r) const;

  Tensor reshaped(Shape shape) const;
  void fill(double value);
  bool all_finite() const;

  Tensor& operator+=(const Tensor& other);
  Tensor& operator-=(const Tensor& other);
  Tensor& operator*=(double s);

  friend bool operator==(const Tensor& a, const Tensor& b) = default;

 private:
  Shape shape_;
  Storage data_;
};

Tensor operator+(Tensor a, const Tensor& b);
Tensor operator-(Tensor a, const Tensor& b);
Tensor operator*(Tensor a, double s);

/// Elementwise product; shapes must match.
Tensor hadamard(const Tensor& a, const Tensor& b);

/// Rows selected by index, in order.
Tensor gather_rows(const Tensor& t, std::span<const std::size_t> index);

/// Every row repeated `times` consecutive times: row i lands at i*times .. i*times+times-1.
Tensor repeat_rows(const Tensor& t, std::size_t times);

/// Columns [begin, end) of a rank-2 tensor.
Tensor slice_cols(const Tensor& t, std::size_t begin, std::size_t end);

/// Sum over rows, giving a rank-1 tensor of length cols().
Tensor sum_rows(const Tensor& t);

/// Sum over columns, giving a rank-1 tensor of length rows().
Tensor sum_cols(const Tensor& t);

double sum(const Tensor& t);
double mean(const Tensor& t);

/// Bitwise equality of the payloads, distinguishing -0.0 and NaN patterns.
bool bit_equal(const Tensor& a, const Tensor& b);

std::string shape_string(const Tensor::Shape& shape);

/// Throws ContractViolation naming both shapes when they differ.
void require_same_shape(const Tensor& a, const Tensor& b, const char* where);

}  // namespace vcae
