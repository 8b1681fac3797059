#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "depthq/eval.hpp"
#include "depthq/png_io.hpp"
#include "depthq/world.hpp"

namespace depthq {

/// Occupancy of trajectory points normalized to [0,1]. Row 0 is the
/// northmost strip (max y), column 0 the westmost (min x), i.e. image order.
struct Heatmap {
  std::size_t rows = 0;
  std::size_t cols = 0;
  double cell_size = 0.2;
  Bounds bounds;
  std::vector<double> values;

  double at(std::size_t row, std::size_t col) const { return values[row * cols + col]; }
  /// Cell containing (x, y); false when outside the grid.
  bool cell_of(double x, double y, std::size_t& row, std::size_t& col) const;
};

/// Grid dimensions covering `bounds` with square cells of `cell_size`.
Heatmap empty_heatmap(const Bounds& bounds, double cell_size);

/// Counts points per cell (points outside the bounds are ignored) and divides
/// by the largest count.
Heatmap build_heatmap(std::span<const Vec2> points, const Bounds& bounds, double cell_size);

/// One point per pose of every episode. Throws ConfigError on empty input.
Heatmap build_heatmap(std::span<const EpisodeLog> logs, const Bounds& bounds, double cell_size);

/// Values scaled to 0..65535.
Gray16Image heatmap_to_gray16(const Heatmap& heatmap);
/// Colormapped rendering (dark blue -> red), one pixel per cell scaled by `scale`.
RgbImage heatmap_to_rgb(const Heatmap& heatmap, std::size_t scale = 4);

}  // namespace depthq
