#include "depthq/weights_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "depthq/error.hpp"

namespace depthq {

namespace {

constexpr char kMagic[4] = {'D', 'Q', 'N', 'W'};
constexpr std::uint32_t kDtypeF32 = 1;
constexpr std::uint32_t kDtypeF64 = 2;
constexpr std::uint32_t kKindConv = 1;
constexpr std::uint32_t kKindFc = 2;

static_assert(std::endian::native == std::endian::little,
              "weights IO assumes a little-endian host");

class Writer {
 public:
  void u32(std::uint32_t v) { raw(&v, sizeof v); }
  void f64(double v) { raw(&v, sizeof v); }
  template <Real T>
  void values(const Tensor<T>& t) { raw(t.data(), t.size() * sizeof(T)); }
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const char*>(p);
    bytes_.insert(bytes_.end(), b, b + n);
  }
  const std::vector<char>& bytes() const { return bytes_; }

 private:
  std::vector<char> bytes_;
};

class Reader {
 public:
  Reader(std::vector<char> bytes, std::string source)
      : bytes_(std::move(bytes)), source_(std::move(source)) {}

  std::uint32_t u32() {
    std::uint32_t v;
    raw(&v, sizeof v);
    return v;
  }
  double f64() {
    double v;
    raw(&v, sizeof v);
    return v;
  }
  void raw(void* p, std::size_t n) {
    if (n > bytes_.size() - pos_) {
      throw FormatError(source_ + ": truncated weights file (needed " + std::to_string(n) +
                        " bytes at offset " + std::to_string(pos_) + ")");
    }
    std::memcpy(p, bytes_.data() + pos_, n);
    pos_ += n;
  }
  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  std::vector<char> bytes_;
  std::string source_;
  std::size_t pos_ = 0;
};

struct LayerHeader {
  std::uint32_t kind = 0;
  std::uint32_t stride = 0;
  std::uint32_t pad = 0;
  Shape weight_shape;
  std::size_t bias_len = 0;
};

std::string layer_label(const std::vector<LayerHeader>& layers, std::size_t i) {
  std::size_t conv = 0, fc = 0;
  for (std::size_t j = 0; j <= i; ++j) (layers[j].kind == kKindConv ? conv : fc)++;
  return layers[i].kind == kKindConv ? "conv" + std::to_string(conv) : "fc" + std::to_string(fc);
}

struct ParsedFile {
  std::uint32_t dtype = 0;
  NetworkConfig config;
  std::vector<LayerHeader> layers;
  std::vector<std::vector<double>> blocks;  // weight, bias, weight, bias, ...
};

std::vector<char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open weights file " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

ParsedFile parse(const std::filesystem::path& path) {
  Reader r(read_file(path), path.string());
  char magic[4];
  r.raw(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw FormatError(path.string() + ": bad magic");
  const std::uint32_t version = r.u32();
  if (version != kWeightsVersion) {
    throw FormatError(path.string() + ": unsupported weights version " + std::to_string(version) +
                      " (expected " + std::to_string(kWeightsVersion) + ")");
  }
  ParsedFile f;
  f.dtype = r.u32();
  if (f.dtype != kDtypeF32 && f.dtype != kDtypeF64) {
    throw FormatError(path.string() + ": unknown dtype tag " + std::to_string(f.dtype));
  }
  f.config.input_rows = r.u32();
  f.config.input_cols = r.u32();
  f.config.dropout_rate = r.f64();
  const std::uint32_t count = r.u32();
  if (count < 2 || count > 64) {
    throw FormatError(path.string() + ": implausible layer count " + std::to_string(count));
  }
  for (std::uint32_t i = 0; i < count; ++i) {
    LayerHeader h;
    h.kind = r.u32();
    h.stride = r.u32();
    h.pad = r.u32();
    const std::uint32_t rank = r.u32();
    if ((h.kind == kKindConv && rank != 4) || (h.kind == kKindFc && rank != 2) ||
        (h.kind != kKindConv && h.kind != kKindFc)) {
      throw FormatError(path.string() + ": layer " + std::to_string(i) + " has bad descriptor");
    }
    for (std::uint32_t d = 0; d < rank; ++d) h.weight_shape.push_back(r.u32());
    h.bias_len = r.u32();
    f.layers.push_back(std::move(h));
  }

  // Architecture: convs first, then fcs.
  std::size_t i = 0;
  f.config.conv_channels.clear();
  f.config.fc_widths.clear();
  for (; i < f.layers.size() && f.layers[i].kind == kKindConv; ++i) {
    const auto& h = f.layers[i];
    if (i == 0) {
      f.config.kernel = h.weight_shape[2];
      f.config.stride = h.stride;
      f.config.pad = h.pad;
    } else if (h.weight_shape[2] != f.config.kernel || h.stride != f.config.stride ||
               h.pad != f.config.pad) {
      throw FormatError(path.string() + ": " + layer_label(f.layers, i) +
                        " geometry differs from conv1 (unsupported)");
    }
    f.config.conv_channels.push_back(h.weight_shape[0]);
  }
  const std::size_t first_fc = i;
  for (; i < f.layers.size(); ++i) {
    if (f.layers[i].kind != kKindFc) {
      throw FormatError(path.string() + ": " + layer_label(f.layers, i) + " out of order");
    }
    if (i + 1 < f.layers.size()) f.config.fc_widths.push_back(f.layers[i].weight_shape[0]);
  }
  if (first_fc == 0 || first_fc == f.layers.size()) {
    throw FormatError(path.string() + ": network must have conv and fc layers");
  }
  f.config.num_actions = f.layers.back().weight_shape[0];

  // The chain must be self-consistent.
  std::vector<Shape> shapes;
  try {
    shapes = f.config.parameter_shapes();
  } catch (const ConfigError& e) {
    throw FormatError(path.string() + ": inconsistent architecture: " + e.what());
  }
  for (std::size_t l = 0; l < f.layers.size(); ++l) {
    if (shapes[2 * l] != f.layers[l].weight_shape || shapes[2 * l + 1][0] != f.layers[l].bias_len) {
      throw FormatError(path.string() + ": " + layer_label(f.layers, l) + " shape " +
                        shape_to_string(f.layers[l].weight_shape) +
                        " does not chain (expected " + shape_to_string(shapes[2 * l]) + ")");
    }
  }

  const std::size_t width = f.dtype == kDtypeF32 ? 4 : 8;
  for (const auto& shape : shapes) {
    std::vector<double> block(shape_volume(shape));
    for (auto& v : block) {
      if (width == 4) {
        float x;
        r.raw(&x, 4);
        v = x;
      } else {
        r.raw(&v, 8);
      }
    }
    f.blocks.push_back(std::move(block));
  }
  if (!r.at_end()) throw FormatError(path.string() + ": trailing bytes after parameters");
  return f;
}

template <Real T>
QNetwork<T> build(const ParsedFile& f) {
  QNetwork<T> net(f.config);
  auto params = net.parameters().zeros_like();
  for (std::size_t i = 0; i < params.tensors.size(); ++i) {
    auto& t = params.tensors[i];
    for (std::size_t j = 0; j < t.size(); ++j) t[j] = static_cast<T>(f.blocks[i][j]);
  }
  net.set_parameters(std::move(params));
  return net;
}

}  // namespace

template <Real T>
void save_weights(const QNetwork<T>& net, const std::filesystem::path& path) {
  const auto& cfg = net.config();
  Writer w;
  w.raw(kMagic, 4);
  w.u32(kWeightsVersion);
  w.u32(std::is_same_v<T, float> ? kDtypeF32 : kDtypeF64);
  w.u32(static_cast<std::uint32_t>(cfg.input_rows));
  w.u32(static_cast<std::uint32_t>(cfg.input_cols));
  w.f64(cfg.dropout_rate);
  const auto& tensors = net.parameters().tensors;
  const std::size_t layers = tensors.size() / 2;
  w.u32(static_cast<std::uint32_t>(layers));
  for (std::size_t l = 0; l < layers; ++l) {
    const bool conv = l < cfg.num_conv();
    w.u32(conv ? kKindConv : kKindFc);
    w.u32(conv ? static_cast<std::uint32_t>(cfg.stride) : 1u);
    w.u32(conv ? static_cast<std::uint32_t>(cfg.pad) : 0u);
    const auto& shape = tensors[2 * l].shape();
    w.u32(static_cast<std::uint32_t>(shape.size()));
    for (auto d : shape) w.u32(static_cast<std::uint32_t>(d));
    w.u32(static_cast<std::uint32_t>(tensors[2 * l + 1].size()));
  }
  for (const auto& t : tensors) w.values(t);

  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write weights file " + path.string());
    out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
    if (!out) throw IoError("failed writing weights file " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

template <Real T>
QNetwork<T> load_weights(const std::filesystem::path& path) {
  return build<T>(parse(path));
}

template <Real T>
QNetwork<T> load_weights(const std::filesystem::path& path, const NetworkConfig& expected) {
  const ParsedFile f = parse(path);
  const auto want = expected.parameter_shapes();
  const auto names = expected.parameter_names();
  const auto have = f.config.parameter_shapes();
  if (f.config.input_rows != expected.input_rows || f.config.input_cols != expected.input_cols) {
    throw ConfigError(path.string() + ": input size " + std::to_string(f.config.input_rows) + "x" +
                      std::to_string(f.config.input_cols) + " differs from expected " +
                      std::to_string(expected.input_rows) + "x" +
                      std::to_string(expected.input_cols));
  }
  for (std::size_t i = 0; i < std::max(want.size(), have.size()); ++i) {
    const std::string layer =
        i < names.size() ? names[i].substr(0, names[i].find('.')) : "layer " + std::to_string(i / 2);
    if (i >= want.size() || i >= have.size()) {
      throw ConfigError(path.string() + ": layer count differs from expected at " + layer);
    }
    if (want[i] != have[i]) {
      throw ConfigError(path.string() + ": shape mismatch in " + layer + ": file has " +
                        shape_to_string(have[i]) + ", expected " + shape_to_string(want[i]));
    }
  }
  if (f.config.stride != expected.stride || f.config.pad != expected.pad) {
    throw ConfigError(path.string() + ": conv stride/pad differ from expected");
  }
  NetworkConfig cfg = f.config;
  cfg.checked = expected.checked;
  ParsedFile adjusted = f;
  adjusted.config = cfg;
  return build<T>(adjusted);
}

template void save_weights(const QNetwork<float>&, const std::filesystem::path&);
template void save_weights(const QNetwork<double>&, const std::filesystem::path&);
template QNetwork<float> load_weights(const std::filesystem::path&);
template QNetwork<double> load_weights(const std::filesystem::path&);
template QNetwork<float> load_weights(const std::filesystem::path&, const NetworkConfig&);
template QNetwork<double> load_weights(const std::filesystem::path&, const NetworkConfig&);

}  // namespace depthq
