#include "depthq/heatmap.hpp"

#include <algorithm>
#include <cmath>

#include "depthq/error.hpp"

namespace depthq {

bool Heatmap::cell_of(double x, double y, std::size_t& row, std::size_t& col) const {
  if (!bounds.contains(x, y)) return false;
  const auto c = static_cast<std::size_t>(std::floor((x - bounds.min_x) / cell_size));
  const auto r = static_cast<std::size_t>(std::floor((bounds.max_y - y) / cell_size));
  col = std::min(c, cols - 1);
  row = std::min(r, rows - 1);
  return true;
}

Heatmap empty_heatmap(const Bounds& bounds, double cell_size) {
  if (!(cell_size > 0.0)) throw ConfigError("heatmap cell size must be positive");
  if (!(bounds.width() > 0.0 && bounds.height() > 0.0)) {
    throw ConfigError("heatmap bounds must have positive extent");
  }
  Heatmap h;
  h.cell_size = cell_size;
  h.bounds = bounds;
  // Small tolerance keeps exact multiples (e.g. 10 m / 0.2 m) from gaining a column.
  h.cols = static_cast<std::size_t>(std::ceil(bounds.width() / cell_size - 1e-9));
  h.rows = static_cast<std::size_t>(std::ceil(bounds.height() / cell_size - 1e-9));
  h.values.assign(h.rows * h.cols, 0.0);
  return h;
}

Heatmap build_heatmap(std::span<const Vec2> points, const Bounds& bounds, double cell_size) {
  Heatmap h = empty_heatmap(bounds, cell_size);
  std::vector<std::size_t> counts(h.values.size(), 0);
  for (const auto& p : points) {
    std::size_t r = 0, c = 0;
    if (h.cell_of(p.x, p.y, r, c)) ++counts[r * h.cols + c];
  }
  const std::size_t peak = *std::max_element(counts.begin(), counts.end());
  if (peak == 0) return h;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    h.values[i] = static_cast<double>(counts[i]) / static_cast<double>(peak);
  }
  return h;
}

Heatmap build_heatmap(std::span<const EpisodeLog> logs, const Bounds& bounds, double cell_size) {
  if (logs.empty()) throw ConfigError("heatmap needs at least one episode log");
  std::vector<Vec2> points;
  for (const auto& log : logs) {
    for (const auto& p : log.poses) points.push_back({p.x, p.y});
  }
  return build_heatmap(points, bounds, cell_size);
}

Gray16Image heatmap_to_gray16(const Heatmap& h) {
  Gray16Image img{h.cols, h.rows, std::vector<std::uint16_t>(h.values.size())};
  for (std::size_t i = 0; i < h.values.size(); ++i) {
    img.pixels[i] = static_cast<std::uint16_t>(std::lround(std::clamp(h.values[i], 0.0, 1.0) * 65535.0));
  }
  return img;
}

RgbImage heatmap_to_rgb(const Heatmap& h, std::size_t scale) {
  if (scale == 0) throw ConfigError("heatmap scale must be positive");
  RgbImage img(h.cols * scale, h.rows * scale);
  for (std::size_t r = 0; r < h.rows; ++r) {
    for (std::size_t c = 0; c < h.cols; ++c) {
      const double v = std::clamp(h.at(r, c), 0.0, 1.0);
      // Piecewise-linear blue -> cyan -> yellow -> red.
      const double red = std::clamp(1.5 - std::abs(4.0 * v - 3.0), 0.0, 1.0);
      const double green = std::clamp(1.5 - std::abs(4.0 * v - 2.0), 0.0, 1.0);
      const double blue = std::clamp(1.5 - std::abs(4.0 * v - 1.0), 0.0, 1.0);
      const auto to8 = [](double x) { return static_cast<std::uint8_t>(std::lround(x * 255.0)); };
      for (std::size_t dy = 0; dy < scale; ++dy) {
        for (std::size_t dx = 0; dx < scale; ++dx) {
          img.set(c * scale + dx, r * scale + dy, to8(red), to8(green), to8(blue));
        }
      }
    }
  }
  return img;
}

}  // namespace depthq
