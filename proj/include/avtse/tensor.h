// include/avtse/tensor.h

// Copyright 2026  AVTSE Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef AVTSE_TENSOR_H_
#define AVTSE_TENSOR_H_

#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace avtse {

/// Dense row-major tensor of doubles. Rank is dynamic but the codebase only
/// uses ranks 1..3 (vectors, [frames x channels] matrices, conv weights).
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int64_t> shape) : shape_(std::move(shape)) {
    data_.assign(static_cast<size_t>(ComputeNumEl(shape_)), 0.0);
  }
  Tensor(std::initializer_list<int64_t> shape)
      : Tensor(std::vector<int64_t>(shape)) {}

  static Tensor FromVector(const std::vector<double>& v) {
    Tensor t({static_cast<int64_t>(v.size())});
    t.data_ = v;
    return t;
  }

  int Rank() const { return static_cast<int>(shape_.size()); }
  int64_t Dim(int i) const { return shape_[static_cast<size_t>(i)]; }
  const std::vector<int64_t>& Shape() const { return shape_; }
  int64_t NumEl() const { return static_cast<int64_t>(data_.size()); }

  // Matrix view helpers; rank-1 tensors behave as a single row.
  int64_t Rows() const { return Rank() <= 1 ? (Rank() == 0 ? 0 : 1) : shape_[0]; }
  int64_t Cols() const {
    if (Rank() == 0) return 0;
    return Rank() == 1 ? shape_[0] : NumEl() / shape_[0];
  }

  double* Data() { return data_.data(); }
  const double* Data() const { return data_.data(); }

  double& operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }
  double operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }
  double& At(int64_t r, int64_t c) { return data_[static_cast<size_t>(r * Cols() + c)]; }
  double At(int64_t r, int64_t c) const { return data_[static_cast<size_t>(r * Cols() + c)]; }

  void Fill(double v) { data_.assign(data_.size(), v); }
  void SetZero() { Fill(0.0); }

  bool SameShape(const Tensor& o) const { return shape_ == o.shape_; }

  std::string ShapeString() const {
    std::string s = "[";
    for (size_t i = 0; i < shape_.size(); ++i) {
      if (i) s += "x";
      s += std::to_string(shape_[i]);
    }
    return s + "]";
  }

 private:
  static int64_t ComputeNumEl(const std::vector<int64_t>& shape) {
    int64_t n = 1;
    for (int64_t d : shape) {
      if (d < 0) throw std::invalid_argument("Tensor: negative dimension");
      n *= d;
    }
    return shape.empty() ? 0 : n;
  }

  std::vector<int64_t> shape_;
  std::vector<double> data_;
};

}  // namespace avtse

#endif  // AVTSE_TENSOR_H_
