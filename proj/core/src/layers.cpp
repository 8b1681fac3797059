#include "depthq/layers.hpp"

#include <algorithm>

#include "depthq/error.hpp"

namespace depthq {

namespace {

// Output index range [lo, hi) along one axis for kernel tap `k` such that the
// sampled input index o*stride + k - pad stays inside [0, in).
struct TapRange {
  std::size_t lo = 0;
  std::size_t hi = 0;
};

TapRange tap_range(std::size_t in, std::size_t out, std::size_t k, std::size_t stride,
                   std::size_t pad) {
  TapRange r;
  if (k < pad) r.lo = (pad - k + stride - 1) / stride;
  const long long last = static_cast<long long>(in) - 1 + static_cast<long long>(pad) -
                         static_cast<long long>(k);
  if (last < 0) return {0, 0};
  r.hi = std::min(out, static_cast<std::size_t>(last) / stride + 1);
  if (r.hi < r.lo) r.hi = r.lo;
  return r;
}

template <Real T>
void check_conv_shapes(const Tensor<T>& input, const Tensor<T>& weights, const Tensor<T>& bias,
                       const ConvSpec& spec) {
  if (input.rank() != 3) {
    throw ConfigError(spec.name + ": input must be [C,H,W], got " +
                      shape_to_string(input.shape()));
  }
  if (weights.rank() != 4 || weights.dim(2) != weights.dim(3)) {
    throw ConfigError(spec.name + ": weights must be [C',C,k,k], got " +
                      shape_to_string(weights.shape()));
  }
  if (weights.dim(1) != input.dim(0)) {
    throw ConfigError(spec.name + ": expects " + std::to_string(weights.dim(1)) +
                      " input channels, got " + std::to_string(input.dim(0)));
  }
  if (bias.size() != weights.dim(0)) {
    throw ConfigError(spec.name + ": bias length " + std::to_string(bias.size()) +
                      " does not match " + std::to_string(weights.dim(0)) + " output channels");
  }
  if (spec.stride == 0) throw ConfigError(spec.name + ": stride must be positive");
}

}  // namespace

std::size_t conv_output_dim(std::size_t in, std::size_t kernel, std::size_t stride,
                            std::size_t pad) {
  if (stride == 0) throw ConfigError("stride must be positive");
  if (in + 2 * pad < kernel) {
    throw ConfigError("kernel " + std::to_string(kernel) + " larger than padded input " +
                      std::to_string(in + 2 * pad));
  }
  return (in + 2 * pad - kernel) / stride + 1;
}

template <Real T>
Tensor<T> conv2d_forward(const Tensor<T>& input, const Tensor<T>& weights, const Tensor<T>& bias,
                         const ConvSpec& spec) {
  check_conv_shapes(input, weights, bias, spec);
  const std::size_t channels = input.dim(0), height = input.dim(1), width = input.dim(2);
  const std::size_t out_channels = weights.dim(0), k = weights.dim(2);
  const std::size_t s = spec.stride, p = spec.pad;
  const std::size_t out_h = conv_output_dim(height, k, s, p);
  const std::size_t out_w = conv_output_dim(width, k, s, p);

  Tensor<T> out({out_channels, out_h, out_w});
  for (std::size_t o = 0; o < out_channels; ++o) {
    T* out_plane = out.data() + o * out_h * out_w;
    std::fill(out_plane, out_plane + out_h * out_w, bias[o]);
    for (std::size_t c = 0; c < channels; ++c) {
      const T* in_plane = input.data() + c * height * width;
      const T* kernel = weights.data() + (o * channels + c) * k * k;
      for (std::size_t ky = 0; ky < k; ++ky) {
        const TapRange rows = tap_range(height, out_h, ky, s, p);
        for (std::size_t kx = 0; kx < k; ++kx) {
          const TapRange cols = tap_range(width, out_w, kx, s, p);
          const T w = kernel[ky * k + kx];
          for (std::size_t oy = rows.lo; oy < rows.hi; ++oy) {
            const T* src = in_plane + (oy * s + ky - p) * width + (cols.lo * s + kx - p);
            T* dst = out_plane + oy * out_w;
            if (s == 1) {
              for (std::size_t ox = cols.lo; ox < cols.hi; ++ox) dst[ox] += w * src[ox - cols.lo];
            } else {
              for (std::size_t ox = cols.lo; ox < cols.hi; ++ox) {
                dst[ox] += w * src[(ox - cols.lo) * s];
              }
            }
          }
        }
      }
    }
  }
  return out;
}

template <Real T>
void conv2d_backward(const Tensor<T>& input, const Tensor<T>& weights,
                     const Tensor<T>& grad_output, const ConvSpec& spec, Tensor<T>* grad_input,
                     Tensor<T>& grad_weights, Tensor<T>& grad_bias) {
  check_conv_shapes(input, weights, grad_bias, spec);
  const std::size_t channels = input.dim(0), height = input.dim(1), width = input.dim(2);
  const std::size_t out_channels = weights.dim(0), k = weights.dim(2);
  const std::size_t s = spec.stride, p = spec.pad;
  const std::size_t out_h = grad_output.dim(1), out_w = grad_output.dim(2);
  if (grad_output.dim(0) != out_channels || out_h != conv_output_dim(height, k, s, p) ||
      out_w != conv_output_dim(width, k, s, p)) {
    throw ConfigError(spec.name + ": output gradient shape " +
                      shape_to_string(grad_output.shape()) + " does not match layer");
  }
  if (grad_weights.shape() != weights.shape()) {
    throw ConfigError(spec.name + ": weight gradient shape mismatch");
  }
  if (grad_input) *grad_input = Tensor<T>(input.shape());

  for (std::size_t o = 0; o < out_channels; ++o) {
    const T* g_plane = grad_output.data() + o * out_h * out_w;
    T bias_sum = 0;
    for (std::size_t i = 0; i < out_h * out_w; ++i) bias_sum += g_plane[i];
    grad_bias[o] += bias_sum;

    for (std::size_t c = 0; c < channels; ++c) {
      const T* in_plane = input.data() + c * height * width;
      T* gin_plane = grad_input ? grad_input->data() + c * height * width : nullptr;
      const T* kernel = weights.data() + (o * channels + c) * k * k;
      T* gkernel = grad_weights.data() + (o * channels + c) * k * k;
      for (std::size_t ky = 0; ky < k; ++ky) {
        const TapRange rows = tap_range(height, out_h, ky, s, p);
        for (std::size_t kx = 0; kx < k; ++kx) {
          const TapRange cols = tap_range(width, out_w, kx, s, p);
          const T w = kernel[ky * k + kx];
          T acc = 0;
          for (std::size_t oy = rows.lo; oy < rows.hi; ++oy) {
            const std::size_t offset = (oy * s + ky - p) * width + (cols.lo * s + kx - p);
            const T* src = in_plane + offset;
            const T* g = g_plane + oy * out_w;
            if (s == 1) {
              for (std::size_t ox = cols.lo; ox < cols.hi; ++ox) acc += g[ox] * src[ox - cols.lo];
              if (gin_plane) {
                T* dst = gin_plane + offset;
                for (std::size_t ox = cols.lo; ox < cols.hi; ++ox) dst[ox - cols.lo] += w * g[ox];
              }
            } else {
              for (std::size_t ox = cols.lo; ox < cols.hi; ++ox) {
                acc += g[ox] * src[(ox - cols.lo) * s];
              }
              if (gin_plane) {
                T* dst = gin_plane + offset;
                for (std::size_t ox = cols.lo; ox < cols.hi; ++ox) {
                  dst[(ox - cols.lo) * s] += w * g[ox];
                }
              }
            }
          }
          gkernel[ky * k + kx] += acc;
        }
      }
    }
  }
}

template <Real T>
PoolResult<T> maxpool2x2_forward(const Tensor<T>& input) {
  if (input.rank() != 3) {
    throw ConfigError("maxpool: input must be [C,H,W], got " + shape_to_string(input.shape()));
  }
  const std::size_t channels = input.dim(0), height = input.dim(1), width = input.dim(2);
  if (height % 2 != 0 || width % 2 != 0) {
    throw ConfigError("maxpool: spatial dimensions must be even, got " +
                      shape_to_string(input.shape()));
  }
  const std::size_t out_h = height / 2, out_w = width / 2;
  PoolResult<T> result{Tensor<T>({channels, out_h, out_w}), {}};
  result.argmax.resize(result.output.size());
  std::size_t n = 0;
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t oy = 0; oy < out_h; ++oy) {
      for (std::size_t ox = 0; ox < out_w; ++ox, ++n) {
        std::size_t best = (c * height + 2 * oy) * width + 2 * ox;
        T best_value = input[best];
        for (std::size_t dy = 0; dy < 2; ++dy) {
          for (std::size_t dx = 0; dx < 2; ++dx) {
            const std::size_t idx = (c * height + 2 * oy + dy) * width + 2 * ox + dx;
            if (input[idx] > best_value) {
              best_value = input[idx];
              best = idx;
            }
          }
        }
        result.output[n] = best_value;
        result.argmax[n] = best;
      }
    }
  }
  return result;
}

template <Real T>
Tensor<T> maxpool2x2_backward(const Tensor<T>& grad_output, std::span<const std::size_t> argmax,
                              const Shape& input_shape) {
  if (argmax.size() != grad_output.size()) {
    throw ConfigError("maxpool backward: argmax does not match output gradient");
  }
  Tensor<T> grad_input(input_shape);
  for (std::size_t i = 0; i < argmax.size(); ++i) grad_input[argmax[i]] += grad_output[i];
  return grad_input;
}

template <Real T>
Tensor<T> relu(const Tensor<T>& input) {
  Tensor<T> out = input;
  relu_inplace(out);
  return out;
}

template <Real T>
void relu_inplace(Tensor<T>& x) {
  for (auto& v : x.values()) v = v > T{0} ? v : T{0};
}

template <Real T>
void relu_backward_inplace(Tensor<T>& grad, const Tensor<T>& activated) {
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (!(activated[i] > T{0})) grad[i] = T{0};
  }
}

template <Real T>
Tensor<T> fc_forward(std::span<const T> input, const Tensor<T>& weights, const Tensor<T>& bias,
                     const std::string& name) {
  if (weights.rank() != 2) {
    throw ConfigError(name + ": weights must be [out,in], got " +
                      shape_to_string(weights.shape()));
  }
  const std::size_t out_n = weights.dim(0), in_n = weights.dim(1);
  if (input.size() != in_n) {
    throw ConfigError(name + ": expects input length " + std::to_string(in_n) + ", got " +
                      std::to_string(input.size()));
  }
  if (bias.size() != out_n) {
    throw ConfigError(name + ": bias length " + std::to_string(bias.size()) +
                      " does not match " + std::to_string(out_n) + " outputs");
  }
  Tensor<T> out({out_n});
  for (std::size_t i = 0; i < out_n; ++i) {
    const T* row = weights.data() + i * in_n;
    T acc = 0;
    for (std::size_t j = 0; j < in_n; ++j) acc += row[j] * input[j];
    out[i] = acc + bias[i];
  }
  return out;
}

template <Real T>
void fc_backward(std::span<const T> input, const Tensor<T>& weights,
                 std::span<const T> grad_output, std::span<T> grad_input,
                 Tensor<T>& grad_weights, Tensor<T>& grad_bias) {
  const std::size_t out_n = weights.dim(0), in_n = weights.dim(1);
  if (input.size() != in_n || grad_output.size() != out_n ||
      (!grad_input.empty() && grad_input.size() != in_n)) {
    throw ConfigError("fc backward: length mismatch");
  }
  std::fill(grad_input.begin(), grad_input.end(), T{0});
  for (std::size_t i = 0; i < out_n; ++i) {
    const T g = grad_output[i];
    if (g == T{0}) continue;
    grad_bias[i] += g;
    T* grow = grad_weights.data() + i * in_n;
    for (std::size_t j = 0; j < in_n; ++j) grow[j] += g * input[j];
    if (!grad_input.empty()) {
      const T* row = weights.data() + i * in_n;
      for (std::size_t j = 0; j < in_n; ++j) grad_input[j] += row[j] * g;
    }
  }
}

void check_dropout_rate(double rate) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw ConfigError("dropout rate must be in [0,1), got " + std::to_string(rate));
  }
}

template <Real T>
DropoutResult<T> dropout(const Tensor<T>& input, double rate, Mode mode, Rng& rng) {
  check_dropout_rate(rate);
  DropoutResult<T> result{input, {}};
  if (mode == Mode::Eval || rate == 0.0) return result;
  const T keep_scale = static_cast<T>(1.0 / (1.0 - rate));
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  result.scale.resize(input.size());
  for (std::size_t i = 0; i < input.size(); ++i) {
    result.scale[i] = uniform(rng) < rate ? T{0} : keep_scale;
    result.output[i] *= result.scale[i];
  }
  return result;
}

#define DEPTHQ_INSTANTIATE_LAYERS(T)                                                          \
  template Tensor<T> conv2d_forward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,    \
                                    const ConvSpec&);                                        \
  template void conv2d_backward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,        \
                                const ConvSpec&, Tensor<T>*, Tensor<T>&, Tensor<T>&);        \
  template PoolResult<T> maxpool2x2_forward(const Tensor<T>&);                               \
  template Tensor<T> maxpool2x2_backward(const Tensor<T>&, std::span<const std::size_t>,     \
                                         const Shape&);                                      \
  template Tensor<T> relu(const Tensor<T>&);                                                 \
  template void relu_inplace(Tensor<T>&);                                                    \
  template void relu_backward_inplace(Tensor<T>&, const Tensor<T>&);                         \
  template Tensor<T> fc_forward(std::span<const T>, const Tensor<T>&, const Tensor<T>&,      \
                                const std::string&);                                         \
  template void fc_backward(std::span<const T>, const Tensor<T>&, std::span<const T>,        \
                            std::span<T>, Tensor<T>&, Tensor<T>&);                           \
  template DropoutResult<T> dropout(const Tensor<T>&, double, Mode, Rng&);

DEPTHQ_INSTANTIATE_LAYERS(float)
DEPTHQ_INSTANTIATE_LAYERS(double)

}  // namespace depthq
