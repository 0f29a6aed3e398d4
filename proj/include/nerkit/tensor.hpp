// Copyright 2026 the nerkit authors
//
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

#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace nerkit {

// Dense row-major tensor of 64-bit floats. Ranks 1 and 2 only; scalars are
// rank-1 tensors of length 1.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> values;

  Tensor() = default;
  Tensor(std::vector<int> s, std::vector<double> v)
      : shape(std::move(s)), values(std::move(v)) {
    check_shape();
  }

  static Tensor zeros(std::vector<int> s) {
    std::size_t n = 1;
    for (int d : s) n *= static_cast<std::size_t>(d);
    return Tensor(std::move(s), std::vector<double>(n, 0.0));
  }
  static Tensor scalar(double x) { return Tensor({1}, {x}); }
  static Tensor vec(std::initializer_list<double> xs) {
    return Tensor({static_cast<int>(xs.size())}, std::vector<double>(xs));
  }
  static Tensor vec(std::vector<double> xs) {
    return Tensor({static_cast<int>(xs.size())}, std::move(xs));
  }
  // rows given as a flat list, row-major
  static Tensor mat(int r, int c, std::vector<double> xs) {
    return Tensor({r, c}, std::move(xs));
  }

  int rank() const { return static_cast<int>(shape.size()); }
  int rows() const { return shape.at(0); }
  int cols() const { return shape.at(1); }
  std::size_t size() const { return values.size(); }

  double& at(int i) { return values[static_cast<std::size_t>(i)]; }
  double at(int i) const { return values[static_cast<std::size_t>(i)]; }
  double& at(int i, int j) {
    return values[static_cast<std::size_t>(i) * cols() + j];
  }
  double at(int i, int j) const {
    return values[static_cast<std::size_t>(i) * cols() + j];
  }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }
  bool all_finite() const {
    for (double v : values)
      if (!std::isfinite(v)) return false;
    return true;
  }

  std::string shape_str() const {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
      if (i) s += "x";
      s += std::to_string(shape[i]);
    }
    return s + "]";
  }

 private:
  void check_shape() const {
    if (shape.empty() || shape.size() > 2)
      throw std::invalid_argument("tensor rank must be 1 or 2");
    std::size_t n = 1;
    for (int d : shape) {
      if (d <= 0) throw std::invalid_argument("tensor dims must be positive");
      n *= static_cast<std::size_t>(d);
    }
    if (n != values.size())
      throw std::invalid_argument("tensor shape/value length mismatch");
  }
};

}  // namespace nerkit
