#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace depthq {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

struct Segment {
  Vec2 a;
  Vec2 b;
};

/// Planar robot pose; theta is kept in (-pi, pi].
struct Pose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  friend bool operator==(const Pose&, const Pose&) = default;
};

struct Bounds {
  double min_x = 0.0;
  double min_y = 0.0;
  double max_x = 0.0;
  double max_y = 0.0;

  bool contains(double x, double y) const {
    return x >= min_x && x <= max_x && y >= min_y && y <= max_y;
  }
  double width() const { return max_x - min_x; }
  double height() const { return max_y - min_y; }
};

inline constexpr std::size_t kNumStartPoses = 12;

/// Wall-segment world. Walls are full height, so the world is fully described
/// by its floor plan.
struct WorldMap {
  std::string name;
  Bounds bounds;
  std::vector<Segment> segments;
  std::vector<Pose> starts;
};

struct CameraConfig;

/// Parses the plain-text world format:
///
///     # comment
///     name <identifier>
///     [bounds]
///     min_x min_y max_x max_y
///     [segments]
///     x1 y1 x2 y2          (one per line, meters)
///     [starts]
///     x y heading_deg      (exactly 12)
///
/// Throws FormatError("<source>:<line>: ...") on malformed input. Geometry is
/// not validated here; see validate_world().
WorldMap parse_world(std::string_view text, const std::string& source = "<world>");

/// Checks the invariants: 12 starts, segments and starts inside the bounds, and
/// every start collision-free for the given camera and threshold.
void validate_world(const WorldMap& map, const CameraConfig& camera,
                    double collision_threshold);

/// Reads, parses and validates a world file.
WorldMap load_world(const std::filesystem::path& path, const CameraConfig& camera,
                    double collision_threshold);
WorldMap load_world(const std::filesystem::path& path);

std::string format_world(const WorldMap& map);

}  // namespace depthq
