//
// Copyright 2026 The IRENE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef IRENE_TENSOR_H_
#define IRENE_TENSOR_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace irene {

using Shape = std::vector<std::size_t>;

std::size_t NumElements(const Shape& shape);
std::string ShapeToString(const Shape& shape);

// Dense row-major tensor of doubles. Rank 0 (shape {}) holds one scalar.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor Scalar(double value) { return Tensor(Shape{}, value); }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }

  // Rank-2 view; a rank-1 tensor is treated as a single row.
  std::size_t rows() const {
    if (shape_.size() > 2) ThrowNotMatrix();
    return shape_.size() == 2 ? shape_[0] : 1;
  }
  std::size_t cols() const {
    if (shape_.size() > 2) ThrowNotMatrix();
    return shape_.empty() ? 1 : shape_.back();
  }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const {
    return data_[r * cols() + c];
  }

  // Value of a one-element tensor.
  double item() const;

  bool AllFinite() const;
  void Fill(double value);

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  [[noreturn]] void ThrowNotMatrix() const;
  Shape shape_;
  std::vector<double> data_;
};

}  // namespace irene

#endif  // IRENE_TENSOR_H_
