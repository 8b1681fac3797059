#pragma once

#include <cstddef>
#include <vector>

namespace depthq {

/// Range image in meters, row-major. A value of 0 means "no valid reading".
struct DepthImage {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> pixels;

  DepthImage() = default;
  DepthImage(std::size_t r, std::size_t c, float fill = 0.0f)
      : rows(r), cols(c), pixels(r * c, fill) {}

  float& at(std::size_t row, std::size_t col) { return pixels[row * cols + col]; }
  float at(std::size_t row, std::size_t col) const { return pixels[row * cols + col]; }

  friend bool operator==(const DepthImage&, const DepthImage&) = default;
};

}  // namespace depthq
