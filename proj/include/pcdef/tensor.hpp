#pragma once

#include <numeric>

#include "pcdef/common.hpp"

namespace pcdef {

// Dense row-major tensor of doubles.
struct Tensor {
  std::vector<std::size_t> shape;
  Vec values;

  Tensor() = default;
  Tensor(std::vector<std::size_t> s, Vec v) : shape(std::move(s)), values(std::move(v)) {
    if (element_count(shape) != values.size())
      throw invalid_input("Tensor: shape/value length mismatch");
  }
  static Tensor zeros(std::vector<std::size_t> s) {
    std::size_t n = element_count(s);
    return Tensor(std::move(s), Vec(n, 0.0));
  }

  static std::size_t element_count(const std::vector<std::size_t>& s) {
    return std::accumulate(s.begin(), s.end(), std::size_t{1}, std::multiplies<>());
  }

  std::size_t rows() const { return shape.empty() ? 0 : shape[0]; }
  std::size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }
  double& at(std::size_t r, std::size_t c) { return values[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols() + c]; }
};

}  // namespace pcdef
