#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "depthq/actions.hpp"
#include "depthq/depth_image.hpp"
#include "depthq/layers.hpp"
#include "depthq/random.hpp"
#include "depthq/tensor.hpp"

namespace depthq {

/// Architecture of the evaluation network: `conv_channels.size()` stages of
/// [conv k x k -> ReLU -> maxpool 2x2], then hidden FC layers each followed by
/// ReLU and dropout, then a linear output layer with one unit per action.
struct NetworkConfig {
  std::size_t input_rows = 120;
  std::size_t input_cols = 160;
  std::vector<std::size_t> conv_channels{32, 64, 64};
  std::size_t kernel = 5;
  std::size_t stride = 1;
  std::size_t pad = 2;
  std::vector<std::size_t> fc_widths{512, 512};
  std::size_t num_actions = kNumActions;
  double dropout_rate = 0.5;
  /// Verify every activation is finite after each layer.
  bool checked = false;

  void validate() const;
  /// Shape of the last pooled feature map, [C, H, W].
  Shape pool3_shape() const;
  /// Parameter tensor shapes in declaration order (w0, b0, w1, b1, ...).
  std::vector<Shape> parameter_shapes() const;
  std::vector<std::string> parameter_names() const;
  std::size_t num_conv() const { return conv_channels.size(); }
  std::size_t num_fc() const { return fc_widths.size() + 1; }

  friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

/// Named parameter tensors in declaration order. Also used for gradients and
/// optimizer velocity.
template <Real T>
struct ParameterSet {
  std::vector<std::string> names;
  std::vector<Tensor<T>> tensors;

  static ParameterSet zeros(const NetworkConfig& config);
  ParameterSet zeros_like() const;
  void set_zero();
  std::size_t count() const;
  friend bool operator==(const ParameterSet&, const ParameterSet&) = default;
};

/// Intermediate values kept from a forward pass for backpropagation.
template <Real T>
struct Activations {
  std::vector<Tensor<T>> conv_inputs;
  std::vector<Tensor<T>> conv_outputs;  // after ReLU, before pooling
  std::vector<std::vector<std::size_t>> pool_argmax;
  Tensor<T> pool3;
  std::vector<Tensor<T>> fc_inputs;
  std::vector<Tensor<T>> fc_hidden;  // after ReLU, before dropout
  std::vector<std::vector<T>> dropout_scale;
  Tensor<T> output;
};

template <Real T>
class QNetwork {
 public:
  /// Zero-initialized network.
  explicit QNetwork(NetworkConfig config);

  /// Fan-in scaled normal initialization, zero biases.
  static QNetwork he_initialized(NetworkConfig config, std::uint64_t seed);

  const NetworkConfig& config() const { return config_; }
  Mode mode() const { return mode_; }
  void set_mode(Mode mode) { mode_ = mode; }

  ParameterSet<T>& parameters() { return params_; }
  const ParameterSet<T>& parameters() const { return params_; }
  void set_parameters(ParameterSet<T> params);

  const Tensor<T>& conv_weights(std::size_t i) const { return params_.tensors[2 * i]; }
  const Tensor<T>& conv_bias(std::size_t i) const { return params_.tensors[2 * i + 1]; }
  const Tensor<T>& fc_weights(std::size_t i) const {
    return params_.tensors[2 * (config_.num_conv() + i)];
  }
  const Tensor<T>& fc_bias(std::size_t i) const {
    return params_.tensors[2 * (config_.num_conv() + i) + 1];
  }
  Tensor<T>& fc_bias(std::size_t i) { return params_.tensors[2 * (config_.num_conv() + i) + 1]; }

  /// Runs the network on a [1, rows, cols] input. In Train mode `rng` drives
  /// dropout and must be non-null when the dropout rate is positive.
  Tensor<T> forward(const Tensor<T>& input, Activations<T>* cache = nullptr,
                    Rng* rng = nullptr) const {
    return forward(input, mode_, cache, rng);
  }
  /// Same, with an explicit mode instead of the network's own.
  Tensor<T> forward(const Tensor<T>& input, Mode mode, Activations<T>* cache,
                    Rng* rng) const;

  /// Accumulates dL/d(theta) into `grads` given dL/d(output).
  void backward(const Activations<T>& cache, std::span<const T> output_grad,
                ParameterSet<T>& grads) const;

  Tensor<T> input_from(const DepthImage& image) const;

 private:
  ConvSpec conv_spec(std::size_t i) const;
  void check_finite(const Tensor<T>& t, const std::string& layer) const;

  NetworkConfig config_;
  ParameterSet<T> params_;
  Mode mode_ = Mode::Eval;
};

template <Real T>
struct ForwardOutput {
  QValues q{};
  Tensor<T> pool3;
};

/// Full pipeline on a depth image: Q-values plus the pool3 feature map.
template <Real T>
ForwardOutput<T> forward_q(const QNetwork<T>& net, const DepthImage& image, Rng* rng = nullptr);

template <Real T>
QValues to_qvalues(const Tensor<T>& output);

template <Real T>
struct MaskedMseResult {
  double loss = 0.0;         // (target - Q(x,a))^2
  double q_selected = 0.0;   // Q(x,a) as seen by the backward pass
  std::vector<T> output_grad;  // dL/d(output); one nonzero entry at most
};

/// Accumulates `scale` * d/d(theta) of (target - Q(x, action))^2 into grads.
/// Only the selected output channel receives gradient.
template <Real T>
MaskedMseResult<T> accumulate_masked_mse(const QNetwork<T>& net, const Tensor<T>& input,
                                         std::size_t action, double target, double scale,
                                         ParameterSet<T>& grads, Rng* rng = nullptr);

/// Single-sample gradient of (target - Q(x, action))^2.
template <Real T>
ParameterSet<T> backward_masked_mse(const QNetwork<T>& net, const Tensor<T>& input,
                                    std::size_t action, double target, Rng* rng = nullptr);

extern template class QNetwork<float>;
extern template class QNetwork<double>;
extern template struct ParameterSet<float>;
extern template struct ParameterSet<double>;

}  // namespace depthq
