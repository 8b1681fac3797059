#pragma once

#include <filesystem>

#include "depthq/qnetwork.hpp"

namespace depthq {

/// Binary weights file, little-endian:
///
///   "DQNW" | u32 version | u32 dtype (1 = f32, 2 = f64)
///   u32 input_rows | u32 input_cols | f64 dropout_rate | u32 layer_count
///   per layer: u32 kind (1 = conv, 2 = fc) | u32 stride | u32 pad
///              u32 weight_rank | weight_rank x u32 dims | u32 bias_len
///   then per layer, in order: weight values, bias values (dtype width each)
inline constexpr std::uint32_t kWeightsVersion = 1;

template <Real T>
void save_weights(const QNetwork<T>& net, const std::filesystem::path& path);

/// Reconstructs the architecture from the file header. Throws FormatError on
/// truncation, bad magic/version, or an inconsistent layer chain.
template <Real T>
QNetwork<T> load_weights(const std::filesystem::path& path);

/// As above, but additionally requires the file to match `expected`; a
/// mismatch throws ConfigError naming the first differing layer.
template <Real T>
QNetwork<T> load_weights(const std::filesystem::path& path, const NetworkConfig& expected);

}  // namespace depthq
