#ifndef POTACC_TENSOR_HPP
#define POTACC_TENSOR_HPP

#include <cstdint>
#include <numeric>
#include <vector>

#include "potacc/error.hpp"

namespace potacc {

using Shape = std::vector<int>;

inline std::int64_t numel(const Shape &s) {
  std::int64_t n = 1;
  for (int d : s) n *= d;
  return n;
}

// Dense row-major tensor. int8 tensors hold activations/weights/outputs,
// int32 tensors hold biases, accumulators and pot_int weights (QKeras
// pot_int reaches 128, which does not fit in int8), double tensors hold
// unquantized weights.
template <typename T>
struct Tensor {
  Shape shape;
  std::vector<T> data;

  Tensor() = default;
  explicit Tensor(Shape s) : shape(std::move(s)), data(numel(shape)) {}
  Tensor(Shape s, std::vector<T> d) : shape(std::move(s)), data(std::move(d)) {
    if (static_cast<std::int64_t>(data.size()) != numel(shape))
      throw ShapeMismatch("tensor data size does not match shape");
  }

  std::int64_t size() const { return static_cast<std::int64_t>(data.size()); }
  T &operator[](std::int64_t i) { return data[i]; }
  const T &operator[](std::int64_t i) const { return data[i]; }
};

using Int8Tensor = Tensor<std::int8_t>;
using Int32Tensor = Tensor<std::int32_t>;
using FloatTensor = Tensor<double>;

}  // namespace potacc

#endif  // POTACC_TENSOR_HPP
