#include "depthq/saliency.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>

#include "depthq/error.hpp"
#include "depthq/format.hpp"

namespace depthq {

namespace {

constexpr std::size_t kKernel = 2 * kUpsampleFactor;
constexpr std::size_t kPad = kUpsampleFactor / 2;

double bilinear_tap(std::size_t t) {
  const double center = (static_cast<double>(kKernel) - 1.0) / 2.0;  // 7.5
  return 1.0 - std::abs(static_cast<double>(t) - center) / static_cast<double>(kUpsampleFactor);
}

// out[y] = sum_i in[i] * tap(y + pad - factor * i), stored dense [out_n x in_n].
std::vector<double> upsample_matrix(std::size_t in_n) {
  const std::size_t out_n = in_n * kUpsampleFactor;
  std::vector<double> m(out_n * in_n, 0.0);
  for (std::size_t i = 0; i < in_n; ++i) {
    for (std::size_t t = 0; t < kKernel; ++t) {
      const long long y = static_cast<long long>(i * kUpsampleFactor + t) - static_cast<long long>(kPad);
      if (y < 0 || y >= static_cast<long long>(out_n)) continue;
      m[static_cast<std::size_t>(y) * in_n + i] += bilinear_tap(t);
    }
  }
  return m;
}

void draw_dot(RgbImage& img, long long x, long long y, int radius) {
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      const long long px = x + dx, py = y + dy;
      if (px < 0 || py < 0 || px >= static_cast<long long>(img.width) ||
          py >= static_cast<long long>(img.height)) {
        continue;
      }
      img.set(static_cast<std::size_t>(px), static_cast<std::size_t>(py), 255, 220, 0);
    }
  }
}

void draw_line(RgbImage& img, double x0, double y0, double x1, double y1, int radius) {
  const int steps = static_cast<int>(std::ceil(std::hypot(x1 - x0, y1 - y0))) + 1;
  for (int s = 0; s <= steps; ++s) {
    const double t = static_cast<double>(s) / steps;
    draw_dot(img, std::lround(x0 + t * (x1 - x0)), std::lround(y0 + t * (y1 - y0)), radius);
  }
}

}  // namespace

std::size_t SaliencyMask::count() const {
  return static_cast<std::size_t>(std::count(marked.begin(), marked.end(), std::uint8_t{1}));
}

template <Real T>
Tensor<double> collapse_channels(const Tensor<T>& features) {
  if (features.rank() != 3) {
    throw ConfigError("collapse_channels expects [C,H,W], got " + shape_to_string(features.shape()));
  }
  const std::size_t c = features.dim(0), h = features.dim(1), w = features.dim(2);
  Tensor<double> out({h, w});
  for (std::size_t k = 0; k < c; ++k) {
    for (std::size_t i = 0; i < h * w; ++i) out[i] += static_cast<double>(features[k * h * w + i]);
  }
  return out;
}

SaliencyMatrix bilinear_upsample8(const Tensor<double>& coarse) {
  if (coarse.rank() != 2) {
    throw ConfigError("bilinear_upsample8 expects [H,W], got " + shape_to_string(coarse.shape()));
  }
  const std::size_t h = coarse.dim(0), w = coarse.dim(1);
  const std::size_t out_h = h * kUpsampleFactor, out_w = w * kUpsampleFactor;
  const auto rows_m = upsample_matrix(h);
  const auto cols_m = upsample_matrix(w);

  // Columns first: tmp[i][x] = sum_j coarse[i][j] * cols_m[x][j].
  std::vector<double> tmp(h * out_w, 0.0);
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t x = 0; x < out_w; ++x) {
      double acc = 0.0;
      for (std::size_t j = 0; j < w; ++j) acc += coarse[i * w + j] * cols_m[x * w + j];
      tmp[i * out_w + x] = acc;
    }
  }
  SaliencyMatrix out{out_h, out_w, std::vector<double>(out_h * out_w, 0.0)};
  for (std::size_t y = 0; y < out_h; ++y) {
    for (std::size_t i = 0; i < h; ++i) {
      const double wy = rows_m[y * h + i];
      if (wy == 0.0) continue;
      for (std::size_t x = 0; x < out_w; ++x) out.values[y * out_w + x] += wy * tmp[i * out_w + x];
    }
  }
  return out;
}

SaliencyMask top_fraction_mask(const SaliencyMatrix& matrix, double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw ConfigError("mask fraction must be in (0,1), got " + std::to_string(fraction));
  }
  const std::size_t n = matrix.values.size();
  const auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  SaliencyMask mask{matrix.rows, matrix.cols, fraction, std::vector<std::uint8_t>(n, 0)};
  if (k == 0) return mask;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const auto before = [&](std::size_t a, std::size_t b) {
    const double va = matrix.values[a], vb = matrix.values[b];
    return va != vb ? va > vb : a < b;
  };
  std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k - 1), order.end(),
                   before);
  for (std::size_t i = 0; i < k; ++i) mask.marked[order[i]] = 1;
  return mask;
}

RgbImage render_overlay(const DepthImage& image, const SaliencyMask& mask,
                        std::optional<Action> chosen, double max_range) {
  if (mask.rows != image.rows || mask.cols != image.cols) {
    throw ConfigError("saliency mask is " + std::to_string(mask.rows) + "x" +
                      std::to_string(mask.cols) + " but the depth image is " +
                      std::to_string(image.rows) + "x" + std::to_string(image.cols));
  }
  if (!(max_range > 0.0)) throw ConfigError("display range must be positive");
  RgbImage out(image.cols, image.rows);
  for (std::size_t r = 0; r < image.rows; ++r) {
    for (std::size_t c = 0; c < image.cols; ++c) {
      const double v = std::clamp(static_cast<double>(image.at(r, c)) / max_range, 0.0, 1.0);
      const auto g = static_cast<std::uint8_t>(std::lround(v * 255.0));
      if (mask.at(r, c)) {
        out.set(c, r, static_cast<std::uint8_t>((g + 160) / 2), static_cast<std::uint8_t>(g / 2),
                static_cast<std::uint8_t>((g + 240) / 2));
      } else {
        out.set(c, r, g, g, g);
      }
    }
  }
  if (chosen) {
    // Left tilts the arrow left, Right tilts it right; 30 degrees per half-step.
    const double tilt = (2.0 - static_cast<double>(index_of(*chosen))) * std::numbers::pi / 6.0;
    const double len = std::max(4.0, static_cast<double>(image.rows) / 6.0);
    const double x0 = static_cast<double>(image.cols) / 2.0;
    const double y0 = static_cast<double>(image.rows) - 2.0;
    const double x1 = x0 - len * std::sin(tilt);
    const double y1 = y0 - len * std::cos(tilt);
    const int radius = image.rows >= 60 ? 1 : 0;
    draw_line(out, x0, y0, x1, y1, radius);
    const double head = len / 3.0;
    for (double side : {-1.0, 1.0}) {
      const double a = tilt + side * 5.0 * std::numbers::pi / 6.0;
      draw_line(out, x1, y1, x1 - head * std::sin(a), y1 - head * std::cos(a), radius);
    }
  }
  return out;
}

void write_saliency_csv(const SaliencyMatrix& matrix, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << "row,col,value\n";
  for (std::size_t r = 0; r < matrix.rows; ++r) {
    for (std::size_t c = 0; c < matrix.cols; ++c) {
      out << r << ',' << c << ',' << format_real(matrix.at(r, c)) << '\n';
    }
  }
  if (!out) throw IoError("failed writing " + path.string());
}

SaliencyResult compute_saliency(const QNetwork<float>& net, const DepthImage& image,
                                double fraction) {
  if (net.mode() != Mode::Eval) throw ConfigError("saliency requires an Eval-mode network");
  const auto fwd = forward_q(net, image);
  SaliencyResult out;
  out.q = fwd.q;
  out.chosen = kAllActions[argmax_index(fwd.q)];
  out.matrix = bilinear_upsample8(collapse_channels(fwd.pool3));
  if (out.matrix.rows != image.rows || out.matrix.cols != image.cols) {
    throw ConfigError("upsampled saliency is " + std::to_string(out.matrix.rows) + "x" +
                      std::to_string(out.matrix.cols) + " but the input is " +
                      std::to_string(image.rows) + "x" + std::to_string(image.cols));
  }
  out.mask = top_fraction_mask(out.matrix, fraction);
  return out;
}

template Tensor<double> collapse_channels(const Tensor<float>&);
template Tensor<double> collapse_channels(const Tensor<double>&);

}  // namespace depthq
