#pragma once

#include <cstddef>
#include <optional>
#include <utility>

#include "depthq/depth_image.hpp"
#include "depthq/random.hpp"
#include "depthq/world.hpp"

namespace depthq {

/// Pinhole range camera. Column cols/2 lies exactly on the optical axis and
/// column 0 at +hfov/2 (left). Pixels report z-depth (distance along the
/// optical axis); readings outside [min_range, max_range] become 0.
struct CameraConfig {
  std::size_t rows = 120;
  std::size_t cols = 160;
  double hfov_deg = 57.0;
  double min_range = 0.45;
  double max_range = 5.0;

  void validate() const;
  /// Angle of column `col`'s ray relative to the heading.
  double column_angle(std::size_t col) const;
};

/// Distance along a ray to the nearest wall, if any.
std::optional<double> cast_ray(const WorldMap& map, Vec2 origin, double angle);

/// Renders one ray per column and replicates it down all rows.
DepthImage render_depth(const WorldMap& map, const Pose& pose, const CameraConfig& camera);

/// Smallest strictly positive pixel, or nullopt when every pixel is 0.
std::optional<float> min_valid_depth(const DepthImage& image);

/// True when the nearest valid reading is closer than `threshold`, or when no
/// reading is valid at all.
bool check_collision(const DepthImage& image, double threshold);

/// Uniformly picks one of the map's start poses; returns it with its 0-based index.
std::pair<Pose, std::size_t> random_start(const WorldMap& map, Rng& rng);

}  // namespace depthq
