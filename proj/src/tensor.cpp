#include "qpqc/tensor.hpp"

#include <numeric>

#include "qpqc/error.hpp"

namespace qpqc {

std::size_t shape_size(std::span<const std::size_t> shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(std::span<const std::size_t> shape) {
  std::string s = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) s += (i ? "," : "") + std::to_string(shape[i]);
  return s + ")";
}

Tensor::Tensor(std::vector<std::size_t> shape_) : shape(std::move(shape_)), data(shape_size(shape), 0.0) {}

Tensor::Tensor(std::vector<std::size_t> shape_, std::vector<double> data_)
    : shape(std::move(shape_)), data(std::move(data_)) {
  if (shape_size(shape) != data.size()) {
    throw ShapeError("tensor shape " + shape_string(shape) + " does not hold " + std::to_string(data.size()) +
                     " values");
  }
}

Tensor Tensor::reshaped(std::vector<std::size_t> new_shape) const { return Tensor(std::move(new_shape), data); }

}  // namespace qpqc
