#include "depthq/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "depthq/error.hpp"

namespace depthq {

std::size_t shape_volume(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

std::string shape_to_string(const Shape& shape) {
  std::string out;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += 'x';
    out += std::to_string(shape[i]);
  }
  return out.empty() ? "scalar" : out;
}

template <Real T>
Tensor<T>::Tensor(Shape shape, T fill)
    : shape_(std::move(shape)), data_(shape_volume(shape_), fill) {
  for (auto d : shape_) {
    if (d == 0) throw ConfigError("tensor dimension must be positive");
  }
}

template <Real T>
Tensor<T>::Tensor(Shape shape, std::vector<T> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_volume(shape_) != data_.size()) {
    throw ConfigError("tensor shape " + shape_to_string(shape_) + " does not match " +
                      std::to_string(data_.size()) + " values");
  }
}

template <Real T>
void Tensor<T>::fill(T value) {
  std::fill(data_.begin(), data_.end(), value);
}

template <Real T>
void Tensor<T>::reshape(Shape shape) {
  if (shape_volume(shape) != data_.size()) {
    throw ConfigError("cannot reshape " + shape_to_string(shape_) + " to " +
                      shape_to_string(shape));
  }
  shape_ = std::move(shape);
}

template <Real T>
bool Tensor<T>::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](T v) { return std::isfinite(v); });
}

template class Tensor<float>;
template class Tensor<double>;

}  // namespace depthq
