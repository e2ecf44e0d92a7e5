/*
 * Copyright 2026 The attrcmp Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef ATTRCMP_TENSOR_HPP_
#define ATTRCMP_TENSOR_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "attrcmp/error.hpp"

namespace attrcmp {

struct Shape {
  int height = 0;
  int width = 0;
  int channels = 0;

  std::size_t size() const {
    return static_cast<std::size_t>(height) * width * channels;
  }
  bool operator==(const Shape&) const = default;
  std::string ToString() const;
};

// Dense H x W x C array, row-major (row, column, channel).
template <typename T>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, T fill = T{})
      : shape_(shape), data_(shape.size(), fill) {
    if (shape.height < 1 || shape.width < 1 || shape.channels < 1) {
      throw InputError("tensor dimensions must be >= 1, got " +
                       shape.ToString());
    }
  }
  Tensor(Shape shape, std::vector<T> data)
      : shape_(shape), data_(std::move(data)) {
    if (shape.height < 1 || shape.width < 1 || shape.channels < 1) {
      throw InputError("tensor dimensions must be >= 1, got " +
                       shape.ToString());
    }
    if (data_.size() != shape.size()) {
      throw InputError("tensor data length " + std::to_string(data_.size()) +
                       " does not match shape " + shape.ToString());
    }
  }

  const Shape& shape() const { return shape_; }
  int height() const { return shape_.height; }
  int width() const { return shape_.width; }
  int channels() const { return shape_.channels; }
  std::size_t size() const { return data_.size(); }

  std::size_t index(int row, int col, int ch) const {
    return (static_cast<std::size_t>(row) * shape_.width + col) *
               shape_.channels +
           ch;
  }
  T& at(int row, int col, int ch) { return data_[index(row, col, ch)]; }
  const T& at(int row, int col, int ch) const {
    return data_[index(row, col, ch)];
  }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }
  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  bool operator==(const Tensor&) const = default;

 private:
  Shape shape_;
  std::vector<T> data_;
};

// Model input: 32-bit floats in [0,1].
using ImageTensor = Tensor<float>;
// Per-pixel attribution; kept in double so path integrals stay exact enough
// for completeness checks.
using SaliencyMap = Tensor<double>;

// Throws InputError unless every value lies in [0,1].
void CheckUnitRange(const ImageTensor& image);

}  // namespace attrcmp

#endif  // ATTRCMP_TENSOR_HPP_
