#include "depthq/depth_camera.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "depthq/error.hpp"

namespace depthq {

void CameraConfig::validate() const {
  if (rows == 0 || cols == 0) throw ConfigError("camera resolution must be positive");
  if (!(hfov_deg > 0.0 && hfov_deg < 180.0)) throw ConfigError("camera hfov must be in (0,180)");
  if (!(min_range >= 0.0 && max_range > min_range)) {
    throw ConfigError("camera range must satisfy 0 <= min_range < max_range");
  }
}

double CameraConfig::column_angle(std::size_t col) const {
  const double center = 0.5 * static_cast<double>(cols);
  const double focal = center / std::tan(0.5 * hfov_deg * std::numbers::pi / 180.0);
  return std::atan((center - static_cast<double>(col)) / focal);
}

std::optional<double> cast_ray(const WorldMap& map, Vec2 origin, double angle) {
  const double dx = std::cos(angle), dy = std::sin(angle);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : map.segments) {
    const double ex = s.b.x - s.a.x, ey = s.b.y - s.a.y;
    const double denom = dx * ey - dy * ex;
    if (std::abs(denom) < 1e-15) continue;  // parallel
    const double wx = s.a.x - origin.x, wy = s.a.y - origin.y;
    const double t = (wx * ey - wy * ex) / denom;  // along the ray
    const double u = (wx * dy - wy * dx) / denom;  // along the segment
    if (t > 1e-12 && u >= 0.0 && u <= 1.0 && t < best) best = t;
  }
  if (std::isinf(best)) return std::nullopt;
  return best;
}

DepthImage render_depth(const WorldMap& map, const Pose& pose, const CameraConfig& camera) {
  DepthImage image(camera.rows, camera.cols);
  for (std::size_t c = 0; c < camera.cols; ++c) {
    const double offset = camera.column_angle(c);
    const auto hit = cast_ray(map, {pose.x, pose.y}, pose.theta + offset);
    float value = 0.0f;
    if (hit) {
      const double z = *hit * std::cos(offset);
      if (z >= camera.min_range && z <= camera.max_range) value = static_cast<float>(z);
    }
    for (std::size_t r = 0; r < camera.rows; ++r) image.at(r, c) = value;
  }
  return image;
}

std::optional<float> min_valid_depth(const DepthImage& image) {
  std::optional<float> best;
  for (float v : image.pixels) {
    if (v > 0.0f && (!best || v < *best)) best = v;
  }
  return best;
}

bool check_collision(const DepthImage& image, double threshold) {
  const auto d = min_valid_depth(image);
  return !d || static_cast<double>(*d) < threshold;
}

std::pair<Pose, std::size_t> random_start(const WorldMap& map, Rng& rng) {
  if (map.starts.empty()) throw ConfigError("world has no start poses");
  std::uniform_int_distribution<std::size_t> pick(0, map.starts.size() - 1);
  const std::size_t i = pick(rng);
  return {map.starts[i], i};
}

}  // namespace depthq
