#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace depthq {

/// 8-bit RGB raster, row-major, top row first.
struct RgbImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> rgb;

  RgbImage() = default;
  RgbImage(std::size_t w, std::size_t h) : width(w), height(h), rgb(w * h * 3, 0) {}

  void set(std::size_t x, std::size_t y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    auto* p = &rgb[(y * width + x) * 3];
    p[0] = r;
    p[1] = g;
    p[2] = b;
  }
  friend bool operator==(const RgbImage&, const RgbImage&) = default;
};

void write_png(const RgbImage& image, const std::filesystem::path& path);
/// Reads any PNG and converts it to 8-bit RGB.
RgbImage read_png(const std::filesystem::path& path);

/// 16-bit grayscale raster.
struct Gray16Image {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint16_t> pixels;
};

/// Binary PGM (P5) with maxval 65535, big-endian samples.
void write_pgm16(const Gray16Image& image, const std::filesystem::path& path);
Gray16Image read_pgm16(const std::filesystem::path& path);

}  // namespace depthq
