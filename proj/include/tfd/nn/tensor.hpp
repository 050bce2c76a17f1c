#pragma once

#include <cstddef>
#include <numeric>
#include <vector>

#include "tfd/core.hpp"

namespace tfd::nn {

/// Flat double-precision storage with a shape. Rank is 1..3 in practice:
/// {n} vectors, {C, L} channel-major sequences, {O, C, K} conv kernels.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> s) : shape(std::move(s)) {
    data.assign(numel_of(shape), 0.0);
  }

  static std::size_t numel_of(const std::vector<std::size_t>& s) {
    std::size_t n = 1;
    for (std::size_t d : s) n *= d;
    return s.empty() ? 0 : n;
  }

  static Tensor zeros(std::vector<std::size_t> s) { return Tensor(std::move(s)); }

  static Tensor zeros_like(const Tensor& other) { return Tensor(other.shape); }

  static Tensor scalar(double v) {
    Tensor t({1});
    t.data[0] = v;
    return t;
  }

  static Tensor from_matrix(const Matrix& m) {
    Tensor t({m.rows(), m.cols()});
    t.data = m.data();
    return t;
  }

  std::size_t numel() const { return data.size(); }
  std::size_t rows() const { return shape.size() > 0 ? shape[0] : 0; }
  std::size_t cols() const { return shape.size() > 1 ? shape[1] : 1; }

  double* row(std::size_t r) { return data.data() + r * cols(); }
  const double* row(std::size_t r) const { return data.data() + r * cols(); }

  bool operator==(const Tensor&) const = default;
};

}  // namespace tfd::nn
