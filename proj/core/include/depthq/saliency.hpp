#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "depthq/actions.hpp"
#include "depthq/depth_image.hpp"
#include "depthq/png_io.hpp"
#include "depthq/qnetwork.hpp"
#include "depthq/tensor.hpp"

namespace depthq {

/// Real-valued map at input resolution.
struct SaliencyMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

struct SaliencyMask {
  std::size_t rows = 0;
  std::size_t cols = 0;
  double fraction = 0.0;
  std::vector<std::uint8_t> marked;

  std::size_t count() const;
  bool at(std::size_t r, std::size_t c) const { return marked[r * cols + c] != 0; }
};

inline constexpr std::size_t kUpsampleFactor = 8;

/// Sums a [C,H,W] feature map over channels into a [H,W] map.
template <Real T>
Tensor<double> collapse_channels(const Tensor<T>& features);

/// Factor-8 transposed convolution with the fixed bilinear kernel
/// w(t) = 1 - |t - 7.5| / 8, t = 0..15 (stride 8, padding 4), per axis.
/// Maps [H,W] to exactly [8H, 8W].
SaliencyMatrix bilinear_upsample8(const Tensor<double>& coarse);

/// Marks exactly round(fraction * N) cells holding the largest values. Equal
/// values at the threshold are taken in row-major order.
SaliencyMask top_fraction_mask(const SaliencyMatrix& matrix, double fraction = 0.10);

/// Grayscale depth (0..max_range -> 0..255, zeros black) with masked pixels
/// tinted purple and, when given, an arrow at the bottom center pointing in
/// the chosen command's direction.
RgbImage render_overlay(const DepthImage& image, const SaliencyMask& mask,
                        std::optional<Action> chosen, double max_range);

struct SaliencyResult {
  QValues q{};
  Action chosen = Action::Left;
  SaliencyMatrix matrix;
  SaliencyMask mask;
};

/// Eval-mode forward, pool3 collapsed and upsampled to input resolution, top
/// `fraction` masked. The network input must be 8x the pool3 grid.
SaliencyResult compute_saliency(const QNetwork<float>& net, const DepthImage& image,
                                double fraction = 0.10);

/// Writes `row,col,value` lines (with header) for inspection and tests.
void write_saliency_csv(const SaliencyMatrix& matrix, const std::filesystem::path& path);

}  // namespace depthq
