#include "depthq/qnetwork.hpp"

#include <cmath>

#include "depthq/error.hpp"

namespace depthq {

void NetworkConfig::validate() const {
  if (input_rows == 0 || input_cols == 0) throw ConfigError("network input must be non-empty");
  if (conv_channels.empty()) throw ConfigError("network needs at least one conv stage");
  if (kernel == 0 || stride == 0) throw ConfigError("conv kernel and stride must be positive");
  if (num_actions == 0) throw ConfigError("network needs at least one output");
  check_dropout_rate(dropout_rate);
  std::size_t h = input_rows, w = input_cols;
  for (std::size_t i = 0; i < conv_channels.size(); ++i) {
    if (conv_channels[i] == 0) throw ConfigError("conv" + std::to_string(i + 1) + ": zero channels");
    h = conv_output_dim(h, kernel, stride, pad);
    w = conv_output_dim(w, kernel, stride, pad);
    if (h % 2 != 0 || w % 2 != 0) {
      throw ConfigError("pool" + std::to_string(i + 1) + ": input " + std::to_string(h) + "x" +
                        std::to_string(w) + " is not evenly poolable");
    }
    h /= 2;
    w /= 2;
  }
  for (std::size_t i = 0; i < fc_widths.size(); ++i) {
    if (fc_widths[i] == 0) throw ConfigError("fc" + std::to_string(i + 1) + ": zero width");
  }
}

Shape NetworkConfig::pool3_shape() const {
  validate();
  std::size_t h = input_rows, w = input_cols;
  for (std::size_t i = 0; i < conv_channels.size(); ++i) {
    h = conv_output_dim(h, kernel, stride, pad) / 2;
    w = conv_output_dim(w, kernel, stride, pad) / 2;
  }
  return {conv_channels.back(), h, w};
}

std::vector<Shape> NetworkConfig::parameter_shapes() const {
  std::vector<Shape> shapes;
  std::size_t in_channels = 1;
  for (auto c : conv_channels) {
    shapes.push_back({c, in_channels, kernel, kernel});
    shapes.push_back({c});
    in_channels = c;
  }
  std::size_t in_n = shape_volume(pool3_shape());
  for (auto width : fc_widths) {
    shapes.push_back({width, in_n});
    shapes.push_back({width});
    in_n = width;
  }
  shapes.push_back({num_actions, in_n});
  shapes.push_back({num_actions});
  return shapes;
}

std::vector<std::string> NetworkConfig::parameter_names() const {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < conv_channels.size(); ++i) {
    names.push_back("conv" + std::to_string(i + 1) + ".weight");
    names.push_back("conv" + std::to_string(i + 1) + ".bias");
  }
  for (std::size_t i = 0; i < num_fc(); ++i) {
    names.push_back("fc" + std::to_string(i + 1) + ".weight");
    names.push_back("fc" + std::to_string(i + 1) + ".bias");
  }
  return names;
}

template <Real T>
ParameterSet<T> ParameterSet<T>::zeros(const NetworkConfig& config) {
  ParameterSet set;
  set.names = config.parameter_names();
  for (auto& shape : config.parameter_shapes()) set.tensors.emplace_back(shape);
  return set;
}

template <Real T>
ParameterSet<T> ParameterSet<T>::zeros_like() const {
  ParameterSet set;
  set.names = names;
  for (const auto& t : tensors) set.tensors.emplace_back(t.shape());
  return set;
}

template <Real T>
void ParameterSet<T>::set_zero() {
  for (auto& t : tensors) t.fill(T{0});
}

template <Real T>
std::size_t ParameterSet<T>::count() const {
  std::size_t n = 0;
  for (const auto& t : tensors) n += t.size();
  return n;
}

template <Real T>
QNetwork<T>::QNetwork(NetworkConfig config) : config_(std::move(config)) {
  config_.validate();
  params_ = ParameterSet<T>::zeros(config_);
}

template <Real T>
QNetwork<T> QNetwork<T>::he_initialized(NetworkConfig config, std::uint64_t seed) {
  QNetwork net(std::move(config));
  Rng rng(seed);
  for (std::size_t i = 0; i < net.params_.tensors.size(); i += 2) {
    auto& weights = net.params_.tensors[i];
    const std::size_t fan_in = weights.size() / weights.dim(0);
    std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
    for (auto& v : weights.values()) v = static_cast<T>(normal(rng));
  }
  return net;
}

template <Real T>
void QNetwork<T>::set_parameters(ParameterSet<T> params) {
  const auto shapes = config_.parameter_shapes();
  if (params.tensors.size() != shapes.size()) {
    throw ConfigError("expected " + std::to_string(shapes.size()) + " parameter tensors, got " +
                      std::to_string(params.tensors.size()));
  }
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    if (params.tensors[i].shape() != shapes[i]) {
      throw ConfigError(params_.names[i] + ": expected shape " + shape_to_string(shapes[i]) +
                        ", got " + shape_to_string(params.tensors[i].shape()));
    }
  }
  params.names = params_.names;
  params_ = std::move(params);
}

template <Real T>
ConvSpec QNetwork<T>::conv_spec(std::size_t i) const {
  return ConvSpec{config_.stride, config_.pad, "conv" + std::to_string(i + 1)};
}

template <Real T>
void QNetwork<T>::check_finite(const Tensor<T>& t, const std::string& layer) const {
  if (config_.checked && !t.all_finite()) {
    throw NumericError(layer + " produced non-finite values");
  }
}

template <Real T>
Tensor<T> QNetwork<T>::input_from(const DepthImage& image) const {
  if (image.rows != config_.input_rows || image.cols != config_.input_cols) {
    throw ConfigError("depth image is " + std::to_string(image.rows) + "x" +
                      std::to_string(image.cols) + ", network expects " +
                      std::to_string(config_.input_rows) + "x" +
                      std::to_string(config_.input_cols));
  }
  std::vector<T> data(image.pixels.begin(), image.pixels.end());
  return Tensor<T>({1, image.rows, image.cols}, std::move(data));
}

template <Real T>
Tensor<T> QNetwork<T>::forward(const Tensor<T>& input, Mode mode, Activations<T>* cache,
                               Rng* rng) const {
  const Shape expected{1, config_.input_rows, config_.input_cols};
  if (input.shape() != expected) {
    throw ConfigError("conv1: expected input " + shape_to_string(expected) + ", got " +
                      shape_to_string(input.shape()));
  }
  const bool drop = mode == Mode::Train && config_.dropout_rate > 0.0;
  if (drop && rng == nullptr) throw ConfigError("Train-mode forward with dropout needs an rng");
  if (cache) *cache = Activations<T>{};

  Tensor<T> x = input;
  for (std::size_t i = 0; i < config_.num_conv(); ++i) {
    Tensor<T> y = conv2d_forward(x, conv_weights(i), conv_bias(i), conv_spec(i));
    relu_inplace(y);
    check_finite(y, "conv" + std::to_string(i + 1));
    auto pooled = maxpool2x2_forward(y);
    if (cache) {
      cache->conv_inputs.push_back(std::move(x));
      cache->conv_outputs.push_back(std::move(y));
      cache->pool_argmax.push_back(std::move(pooled.argmax));
    }
    x = std::move(pooled.output);
  }
  if (cache) cache->pool3 = x;

  x.reshape({x.size()});
  const std::size_t hidden = config_.fc_widths.size();
  for (std::size_t i = 0; i <= hidden; ++i) {
    const std::string name = "fc" + std::to_string(i + 1);
    Tensor<T> y = fc_forward<T>(x.values(), fc_weights(i), fc_bias(i), name);
    if (cache) cache->fc_inputs.push_back(std::move(x));
    if (i < hidden) {
      relu_inplace(y);
      check_finite(y, name);
      if (drop) {
        auto d = dropout(y, config_.dropout_rate, Mode::Train, *rng);
        if (cache) {
          cache->fc_hidden.push_back(std::move(y));
          cache->dropout_scale.push_back(std::move(d.scale));
        }
        x = std::move(d.output);
      } else {
        if (cache) {
          cache->fc_hidden.push_back(y);
          cache->dropout_scale.emplace_back();
        }
        x = std::move(y);
      }
    } else {
      check_finite(y, name);
      x = std::move(y);
    }
  }
  if (cache) cache->output = x;
  return x;
}

template <Real T>
void QNetwork<T>::backward(const Activations<T>& cache, std::span<const T> output_grad,
                           ParameterSet<T>& grads) const {
  if (output_grad.size() != config_.num_actions) {
    throw ConfigError("output gradient must have one entry per action");
  }
  if (cache.fc_inputs.size() != config_.num_fc()) {
    throw ConfigError("activation cache does not come from this network");
  }
  const std::size_t nc = config_.num_conv();
  std::vector<T> g(output_grad.begin(), output_grad.end());
  for (std::size_t i = config_.num_fc(); i-- > 0;) {
    if (i + 1 < config_.num_fc()) {
      const auto& scale = cache.dropout_scale[i];
      for (std::size_t j = 0; j < g.size(); ++j) {
        if (!scale.empty()) g[j] *= scale[j];
        if (!(cache.fc_hidden[i][j] > T{0})) g[j] = T{0};
      }
    }
    const auto& in = cache.fc_inputs[i];
    std::vector<T> g_in(in.size());
    fc_backward<T>(in.values(), fc_weights(i), g, g_in, grads.tensors[2 * (nc + i)],
                   grads.tensors[2 * (nc + i) + 1]);
    g = std::move(g_in);
  }

  Tensor<T> grad(cache.pool3.shape(), std::move(g));
  for (std::size_t i = nc; i-- > 0;) {
    Tensor<T> g_conv =
        maxpool2x2_backward(grad, cache.pool_argmax[i], cache.conv_outputs[i].shape());
    relu_backward_inplace(g_conv, cache.conv_outputs[i]);
    Tensor<T> g_in;
    conv2d_backward(cache.conv_inputs[i], conv_weights(i), g_conv, conv_spec(i),
                    i > 0 ? &g_in : nullptr, grads.tensors[2 * i], grads.tensors[2 * i + 1]);
    grad = std::move(g_in);
  }
}

template <Real T>
QValues to_qvalues(const Tensor<T>& output) {
  if (output.size() != kNumActions) {
    throw ConfigError("network output has " + std::to_string(output.size()) +
                      " values, expected " + std::to_string(kNumActions));
  }
  QValues q{};
  for (std::size_t i = 0; i < kNumActions; ++i) q[i] = static_cast<double>(output[i]);
  return q;
}

template <Real T>
ForwardOutput<T> forward_q(const QNetwork<T>& net, const DepthImage& image, Rng* rng) {
  Activations<T> cache;
  Tensor<T> out = net.forward(net.input_from(image), &cache, rng);
  return ForwardOutput<T>{to_qvalues(out), std::move(cache.pool3)};
}

template <Real T>
MaskedMseResult<T> accumulate_masked_mse(const QNetwork<T>& net, const Tensor<T>& input,
                                         std::size_t action, double target, double scale,
                                         ParameterSet<T>& grads, Rng* rng) {
  if (!std::isfinite(target)) throw NumericError("masked MSE target is not finite");
  if (action >= net.config().num_actions) {
    throw ConfigError("action index " + std::to_string(action) + " out of range");
  }
  Activations<T> cache;
  Tensor<T> out = net.forward(input, &cache, rng);
  MaskedMseResult<T> result;
  result.q_selected = static_cast<double>(out[action]);
  const double err = result.q_selected - target;
  result.loss = err * err;
  result.output_grad.assign(out.size(), T{0});
  result.output_grad[action] = static_cast<T>(2.0 * err * scale);
  if (result.output_grad[action] != T{0}) net.backward(cache, result.output_grad, grads);
  return result;
}

template <Real T>
ParameterSet<T> backward_masked_mse(const QNetwork<T>& net, const Tensor<T>& input,
                                    std::size_t action, double target, Rng* rng) {
  auto grads = net.parameters().zeros_like();
  accumulate_masked_mse(net, input, action, target, 1.0, grads, rng);
  return grads;
}

template struct ParameterSet<float>;
template struct ParameterSet<double>;
template class QNetwork<float>;
template class QNetwork<double>;

#define DEPTHQ_INSTANTIATE_QNET(T)                                                            \
  template QValues to_qvalues(const Tensor<T>&);                                              \
  template ForwardOutput<T> forward_q(const QNetwork<T>&, const DepthImage&, Rng*);           \
  template MaskedMseResult<T> accumulate_masked_mse(const QNetwork<T>&, const Tensor<T>&,     \
                                                    std::size_t, double, double,              \
                                                    ParameterSet<T>&, Rng*);                  \
  template ParameterSet<T> backward_masked_mse(const QNetwork<T>&, const Tensor<T>&,          \
                                               std::size_t, double, Rng*);

DEPTHQ_INSTANTIATE_QNET(float)
DEPTHQ_INSTANTIATE_QNET(double)

}  // namespace depthq
