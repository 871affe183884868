// earseld/tensor.h
//
// Copyright 2026  EarSELD Authors
//
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

#ifndef EARSELD_TENSOR_H_
#define EARSELD_TENSOR_H_

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <vector>

#include "earseld/common.h"

namespace earseld {

// Dense row-major tensor. Deliberately minimal: shape + contiguous storage;
// all heavy math happens in free functions working on raw pointers.
template <typename S>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int64_t> shape) : shape_(std::move(shape)) {
    data_.assign(ComputeNumel(shape_), S(0));
  }
  Tensor(std::initializer_list<int64_t> shape)
      : Tensor(std::vector<int64_t>(shape)) {}

  static Tensor Zeros(std::vector<int64_t> shape) {
    return Tensor(std::move(shape));
  }
  static Tensor Full(std::vector<int64_t> shape, S value) {
    Tensor t(std::move(shape));
    t.Fill(value);
    return t;
  }

  const std::vector<int64_t> &shape() const { return shape_; }
  int64_t dim(int i) const { return shape_.at(i); }
  int ndim() const { return static_cast<int>(shape_.size()); }
  int64_t numel() const { return static_cast<int64_t>(data_.size()); }

  S *data() { return data_.data(); }
  const S *data() const { return data_.data(); }
  S &operator[](int64_t i) { return data_[i]; }
  const S &operator[](int64_t i) const { return data_[i]; }

  S &at(int64_t i, int64_t j) { return data_[i * shape_[1] + j]; }
  const S &at(int64_t i, int64_t j) const { return data_[i * shape_[1] + j]; }
  S &at(int64_t i, int64_t j, int64_t k) {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }
  const S &at(int64_t i, int64_t j, int64_t k) const {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }
  S &at(int64_t i, int64_t j, int64_t k, int64_t l) {
    return data_[((i * shape_[1] + j) * shape_[2] + k) * shape_[3] + l];
  }
  const S &at(int64_t i, int64_t j, int64_t k, int64_t l) const {
    return data_[((i * shape_[1] + j) * shape_[2] + k) * shape_[3] + l];
  }

  void Fill(S value) { std::fill(data_.begin(), data_.end(), value); }
  void Zero() { Fill(S(0)); }

  // Reinterprets the shape; element count must match.
  void Reshape(std::vector<int64_t> shape) {
    EARSELD_CHECK(ComputeNumel(shape) == numel(), ShapeError,
                  "reshape changes element count");
    shape_ = std::move(shape);
  }

  template <typename T>
  Tensor<T> Cast() const {
    Tensor<T> out(shape_);
    for (int64_t i = 0; i < numel(); ++i) out[i] = static_cast<T>(data_[i]);
    return out;
  }

  bool SameShape(const Tensor &other) const { return shape_ == other.shape_; }

 private:
  static int64_t ComputeNumel(const std::vector<int64_t> &shape) {
    int64_t n = 1;
    for (int64_t d : shape) {
      EARSELD_CHECK(d >= 0, ShapeError, "negative dimension");
      n *= d;
    }
    return n;
  }

  std::vector<int64_t> shape_;
  std::vector<S> data_;
};

}  // namespace earseld

#endif  // EARSELD_TENSOR_H_
