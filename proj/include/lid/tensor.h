// lid/tensor.h

// Copyright 2026 The lidnet Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef LID_TENSOR_H_
#define LID_TENSOR_H_

#include <cstdint>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "lid/error.h"

namespace lid {

/// Dense row-major n-dimensional array. Value-semantic; the carrier for
/// features, activations, parameters and gradients.
template <typename Real>
struct TensorT {
  std::vector<int64_t> shape;
  std::vector<Real> data;

  TensorT() = default;

  explicit TensorT(std::vector<int64_t> s) : shape(std::move(s)) {
    data.assign(CheckedNumel(shape), Real(0));
  }

  TensorT(std::vector<int64_t> s, std::vector<Real> d)
      : shape(std::move(s)), data(std::move(d)) {
    if (static_cast<int64_t>(data.size()) != CheckedNumel(shape)) {
      throw DimensionError("tensor data length " +
                           std::to_string(data.size()) +
                           " does not match shape " + ShapeStr(shape));
    }
  }

  static TensorT Zeros(std::vector<int64_t> s) { return TensorT(std::move(s)); }

  static TensorT Full(std::vector<int64_t> s, Real v) {
    TensorT t(std::move(s));
    std::fill(t.data.begin(), t.data.end(), v);
    return t;
  }

  static TensorT Scalar(Real v) { return TensorT({1}, {v}); }

  int64_t Numel() const { return static_cast<int64_t>(data.size()); }
  int Rank() const { return static_cast<int>(shape.size()); }

  int64_t Dim(int i) const { return shape[static_cast<size_t>(i)]; }

  Real& At(int64_t i) { return data[static_cast<size_t>(i)]; }
  Real At(int64_t i) const { return data[static_cast<size_t>(i)]; }

  Real& At(int64_t i, int64_t j) {
    return data[static_cast<size_t>(i * shape[1] + j)];
  }
  Real At(int64_t i, int64_t j) const {
    return data[static_cast<size_t>(i * shape[1] + j)];
  }

  Real& At(int64_t i, int64_t j, int64_t k) {
    return data[static_cast<size_t>((i * shape[1] + j) * shape[2] + k)];
  }
  Real At(int64_t i, int64_t j, int64_t k) const {
    return data[static_cast<size_t>((i * shape[1] + j) * shape[2] + k)];
  }

  bool SameShape(const TensorT& o) const { return shape == o.shape; }

  void Fill(Real v) { std::fill(data.begin(), data.end(), v); }

  std::string ShapeStr() const { return ShapeStr(shape); }

  static std::string ShapeStr(const std::vector<int64_t>& s) {
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < s.size(); ++i) {
      if (i) os << "x";
      os << s[i];
    }
    os << "]";
    return os.str();
  }

  template <typename Other>
  TensorT<Other> Cast() const {
    TensorT<Other> out;
    out.shape = shape;
    out.data.reserve(data.size());
    for (Real v : data) out.data.push_back(static_cast<Other>(v));
    return out;
  }

 private:
  static int64_t CheckedNumel(const std::vector<int64_t>& s) {
    if (s.empty()) throw DimensionError("tensor must have rank >= 1");
    int64_t n = 1;
    for (int64_t d : s) {
      if (d < 1) throw DimensionError("tensor dimensions must be >= 1, got " +
                                      ShapeStr(s));
      n *= d;
    }
    return n;
  }
};

using Tensor = TensorT<float>;

}  // namespace lid

#endif  // LID_TENSOR_H_
