#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "depthq/random.hpp"
#include "depthq/tensor.hpp"

namespace depthq {

enum class Mode { Train, Eval };

struct ConvSpec {
  std::size_t stride = 1;
  std::size_t pad = 0;
  std::string name = "conv";
};

/// floor((in + 2*pad - kernel) / stride) + 1; throws if the kernel does not fit.
std::size_t conv_output_dim(std::size_t in, std::size_t kernel, std::size_t stride,
                            std::size_t pad);

/// Cross-correlation of a [C,H,W] input with [C',C,k,k] weights plus bias [C'].
template <Real T>
Tensor<T> conv2d_forward(const Tensor<T>& input, const Tensor<T>& weights,
                         const Tensor<T>& bias, const ConvSpec& spec);

/// Accumulates parameter gradients into grad_weights/grad_bias. When
/// grad_input is non-null it is overwritten with dL/d(input).
template <Real T>
void conv2d_backward(const Tensor<T>& input, const Tensor<T>& weights,
                     const Tensor<T>& grad_output, const ConvSpec& spec,
                     Tensor<T>* grad_input, Tensor<T>& grad_weights, Tensor<T>& grad_bias);

template <Real T>
struct PoolResult {
  Tensor<T> output;
  /// Flat input index of the winning element for every output cell.
  std::vector<std::size_t> argmax;
};

/// 2x2 / stride-2 max pooling. Ties go to the first element in row-major
/// window order.
template <Real T>
PoolResult<T> maxpool2x2_forward(const Tensor<T>& input);

template <Real T>
Tensor<T> maxpool2x2_backward(const Tensor<T>& grad_output,
                              std::span<const std::size_t> argmax, const Shape& input_shape);

template <Real T>
Tensor<T> relu(const Tensor<T>& input);

template <Real T>
void relu_inplace(Tensor<T>& x);

/// Gradient through ReLU given the activated output (derivative 0 at 0).
template <Real T>
void relu_backward_inplace(Tensor<T>& grad, const Tensor<T>& activated);

/// y = W x + b with W stored [out, in].
template <Real T>
Tensor<T> fc_forward(std::span<const T> input, const Tensor<T>& weights,
                     const Tensor<T>& bias, const std::string& name = "fc");

template <Real T>
void fc_backward(std::span<const T> input, const Tensor<T>& weights,
                 std::span<const T> grad_output, std::span<T> grad_input,
                 Tensor<T>& grad_weights, Tensor<T>& grad_bias);

template <Real T>
struct DropoutResult {
  Tensor<T> output;
  /// Per-element multiplier applied (0 or 1/(1-rate)); empty when dropout was
  /// the identity.
  std::vector<T> scale;
};

/// Inverted dropout: in Train mode zeroes each element with probability
/// `rate` and scales survivors by 1/(1-rate). Eval mode is the identity.
template <Real T>
DropoutResult<T> dropout(const Tensor<T>& input, double rate, Mode mode, Rng& rng);

void check_dropout_rate(double rate);

}  // namespace depthq
