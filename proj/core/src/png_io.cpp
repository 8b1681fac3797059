#include "depthq/png_io.hpp"

#include <png.h>

#include <fstream>
#include <string>

#include "depthq/error.hpp"

namespace depthq {

void write_png(const RgbImage& image, const std::filesystem::path& path) {
  if (image.width == 0 || image.height == 0 || image.rgb.size() != image.width * image.height * 3) {
    throw ConfigError("cannot write an empty or inconsistent RGB image");
  }
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width);
  png.height = static_cast<png_uint_32>(image.height);
  png.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&png, path.string().c_str(), 0, image.rgb.data(), 0, nullptr)) {
    const std::string message = png.message;
    png_image_free(&png);
    throw IoError("cannot write " + path.string() + ": " + message);
  }
}

RgbImage read_png(const std::filesystem::path& path) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.string().c_str())) {
    const std::string message = png.message;
    png_image_free(&png);
    throw IoError("cannot read " + path.string() + ": " + message);
  }
  png.format = PNG_FORMAT_RGB;
  RgbImage image(png.width, png.height);
  if (!png_image_finish_read(&png, nullptr, image.rgb.data(), 0, nullptr)) {
    const std::string message = png.message;
    png_image_free(&png);
    throw IoError("cannot read " + path.string() + ": " + message);
  }
  return image;
}

void write_pgm16(const Gray16Image& image, const std::filesystem::path& path) {
  if (image.pixels.size() != image.width * image.height || image.pixels.empty()) {
    throw ConfigError("cannot write an empty or inconsistent PGM image");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P5\n" << image.width << ' ' << image.height << "\n65535\n";
  for (std::uint16_t v : image.pixels) {
    const char be[2] = {static_cast<char>(v >> 8), static_cast<char>(v & 0xFF)};
    out.write(be, 2);
  }
  if (!out) throw IoError("failed writing " + path.string());
}

Gray16Image read_pgm16(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string magic;
  in >> magic;
  if (magic != "P5") throw FormatError(path.string() + ": not a binary PGM");
  const auto next_number = [&]() -> long long {
    in >> std::ws;
    while (in.peek() == '#') {
      std::string comment;
      std::getline(in, comment);
      in >> std::ws;
    }
    long long v = -1;
    in >> v;
    if (!in) throw FormatError(path.string() + ": malformed PGM header");
    return v;
  };
  const long long width = next_number(), height = next_number(), maxval = next_number();
  if (width <= 0 || height <= 0 || maxval != 65535) {
    throw FormatError(path.string() + ": expected a 16-bit PGM (maxval 65535)");
  }
  in.get();  // single whitespace after maxval
  Gray16Image image{static_cast<std::size_t>(width), static_cast<std::size_t>(height), {}};
  image.pixels.resize(image.width * image.height);
  for (auto& v : image.pixels) {
    unsigned char be[2];
    if (!in.read(reinterpret_cast<char*>(be), 2)) throw FormatError(path.string() + ": truncated PGM");
    v = static_cast<std::uint16_t>((be[0] << 8) | be[1]);
  }
  return image;
}

}  // namespace depthq
