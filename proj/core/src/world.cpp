#include "depthq/world.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "depthq/depth_camera.hpp"
#include "depthq/error.hpp"
#include "depthq/kinematics.hpp"

namespace depthq {

namespace {

enum class Section { None, Bounds, Segments, Starts };

std::vector<double> parse_numbers(const std::string& line, const std::string& where) {
  std::istringstream in(line);
  std::vector<double> values;
  std::string token;
  while (in >> token) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != token.size() || !std::isfinite(v)) {
      throw FormatError(where + ": expected a number, got '" + token + "'");
    }
    values.push_back(v);
  }
  return values;
}

std::string trim(std::string s) {
  const auto hash = s.find('#');
  if (hash != std::string::npos) s.erase(hash);
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool inside(const Bounds& b, Vec2 p) {
  constexpr double eps = 1e-9;
  return p.x >= b.min_x - eps && p.x <= b.max_x + eps && p.y >= b.min_y - eps &&
         p.y <= b.max_y + eps;
}

}  // namespace

WorldMap parse_world(std::string_view text, const std::string& source) {
  WorldMap map;
  Section section = Section::None;
  bool have_bounds = false;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string where = source + ":" + std::to_string(line_no);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line == "[bounds]") section = Section::Bounds;
      else if (line == "[segments]") section = Section::Segments;
      else if (line == "[starts]") section = Section::Starts;
      else throw FormatError(where + ": unknown section " + line);
      continue;
    }
    if (line.rfind("name", 0) == 0 && (line.size() == 4 || line[4] == ' ' || line[4] == '\t')) {
      map.name = trim(line.substr(4));
      continue;
    }
    const auto values = parse_numbers(line, where);
    switch (section) {
      case Section::None:
        throw FormatError(where + ": data outside of a section");
      case Section::Bounds:
        if (have_bounds) throw FormatError(where + ": bounds given twice");
        if (values.size() != 4) throw FormatError(where + ": bounds need 4 numbers");
        map.bounds = {values[0], values[1], values[2], values[3]};
        if (!(map.bounds.max_x > map.bounds.min_x && map.bounds.max_y > map.bounds.min_y)) {
          throw FormatError(where + ": bounds must have positive extent");
        }
        have_bounds = true;
        break;
      case Section::Segments:
        if (values.size() != 4) throw FormatError(where + ": a segment needs 4 numbers");
        map.segments.push_back({{values[0], values[1]}, {values[2], values[3]}});
        break;
      case Section::Starts:
        if (values.size() != 3) throw FormatError(where + ": a start needs x y heading_deg");
        map.starts.push_back(
            {values[0], values[1], normalize_angle(values[2] * std::numbers::pi / 180.0)});
        break;
    }
  }
  if (!have_bounds) throw FormatError(source + ": missing [bounds] section");
  if (map.name.empty()) map.name = source;
  return map;
}

void validate_world(const WorldMap& map, const CameraConfig& camera, double collision_threshold) {
  if (map.starts.size() != kNumStartPoses) {
    throw ConfigError("world '" + map.name + "' has " + std::to_string(map.starts.size()) +
                      " start poses, expected " + std::to_string(kNumStartPoses));
  }
  for (std::size_t i = 0; i < map.segments.size(); ++i) {
    const auto& s = map.segments[i];
    if (!inside(map.bounds, s.a) || !inside(map.bounds, s.b)) {
      throw ConfigError("world '" + map.name + "': segment " + std::to_string(i) +
                        " lies outside the bounds");
    }
  }
  for (std::size_t i = 0; i < map.starts.size(); ++i) {
    const auto& p = map.starts[i];
    if (!map.bounds.contains(p.x, p.y)) {
      throw ConfigError("world '" + map.name + "': start pose " + std::to_string(i + 1) +
                        " lies outside the bounds");
    }
    const DepthImage image = render_depth(map, p, camera);
    if (check_collision(image, collision_threshold)) {
      const auto d = min_valid_depth(image);
      throw ConfigError("world '" + map.name + "': start pose " + std::to_string(i + 1) +
                        " is not collision-free (min depth " +
                        (d ? std::to_string(*d) : std::string("none")) + " m)");
    }
  }
}

WorldMap load_world(const std::filesystem::path& path, const CameraConfig& camera,
                    double collision_threshold) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open world file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  WorldMap map = parse_world(buffer.str(), path.string());
  if (map.name == path.string()) map.name = path.stem().string();
  validate_world(map, camera, collision_threshold);
  return map;
}

WorldMap load_world(const std::filesystem::path& path) {
  return load_world(path, CameraConfig{}, 0.55);
}

std::string format_world(const WorldMap& map) {
  std::ostringstream out;
  out.precision(17);
  out << "name " << map.name << "\n[bounds]\n"
      << map.bounds.min_x << ' ' << map.bounds.min_y << ' ' << map.bounds.max_x << ' '
      << map.bounds.max_y << "\n[segments]\n";
  for (const auto& s : map.segments) {
    out << s.a.x << ' ' << s.a.y << ' ' << s.b.x << ' ' << s.b.y << '\n';
  }
  out << "[starts]\n";
  for (const auto& p : map.starts) {
    out << p.x << ' ' << p.y << ' ' << p.theta * 180.0 / std::numbers::pi << '\n';
  }
  return out.str();
}

}  // namespace depthq
