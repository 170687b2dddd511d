// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dcg Authors

#pragma once

#include <cstddef>
#include <functional>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace dcg::ad {

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Dense row-major float64 tensor. Operators in this library work on rank-2
// tensors; vectors are 1 x n.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;
  bool requires_grad = false;

  Tensor() = default;
  Tensor(std::size_t rows, std::size_t cols, double fill = 0.0)
      : shape{rows, cols}, data(rows * cols, fill) {}
  Tensor(std::vector<std::size_t> shp, std::vector<double> values);

  std::size_t numel() const {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
  }
  std::size_t rows() const { return shape.size() == 2 ? shape[0] : 1; }
  std::size_t cols() const { return shape.size() == 2 ? shape[1] : numel(); }
  double& at(std::size_t r, std::size_t c) { return data[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols() + c]; }
  bool same_shape(const Tensor& o) const { return shape == o.shape; }
  std::string shape_str() const;

  static Tensor scalar(double v) { return Tensor({1, 1}, {v}); }
  static Tensor row(std::vector<double> v);
};

// Uniform(-limit, limit) with limit = sqrt(6 / (fan_in + fan_out)).
Tensor xavier(std::size_t rows, std::size_t cols, std::mt19937_64& rng);
Tensor normal(std::size_t rows, std::size_t cols, double stddev, std::mt19937_64& rng);

}  // namespace dcg::ad
