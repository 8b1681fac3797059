#include "depthq/environment.hpp"

#include <algorithm>
#include <cmath>

#include "depthq/error.hpp"

namespace depthq {

void EnvConfig::validate() const {
  camera.validate();
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  if (!(collision_threshold > 0.0)) throw ConfigError("collision threshold must be positive");
}

PackedDepth PackedDepth::pack(const DepthImage& image) {
  PackedDepth p{image.rows, image.cols, {}};
  p.millimeters.resize(image.pixels.size());
  std::transform(image.pixels.begin(), image.pixels.end(), p.millimeters.begin(), [](float m) {
    const double mm = std::round(static_cast<double>(m) * 1000.0);
    return static_cast<std::uint16_t>(std::clamp(mm, 0.0, 65535.0));
  });
  return p;
}

DepthImage PackedDepth::unpack() const {
  DepthImage image(rows, cols);
  std::transform(millimeters.begin(), millimeters.end(), image.pixels.begin(),
                 [](std::uint16_t mm) { return static_cast<float>(mm) / 1000.0f; });
  return image;
}

DepthEnv::DepthEnv(const WorldMap& map, EnvConfig config) : map_(&map), config_(std::move(config)) {
  config_.validate();
}

DepthImage DepthEnv::reset_to(std::size_t index, const Pose& pose) {
  if (index >= map_->starts.size()) {
    throw ConfigError("start index " + std::to_string(index + 1) + " out of range 1.." +
                      std::to_string(map_->starts.size()));
  }
  start_index_ = index;
  pose_ = pose;
  image_ = render_depth(*map_, pose_, config_.camera);
  return image_;
}

DepthImage DepthEnv::reset_to(std::size_t index) {
  if (index >= map_->starts.size()) return reset_to(index, Pose{});
  return reset_to(index, map_->starts[index]);
}

DepthImage DepthEnv::reset(Rng& rng) {
  const auto [pose, index] = random_start(*map_, rng);
  return reset_to(index, pose);
}

StepOutcome<DepthImage> DepthEnv::step(Action action) {
  pose_ = step_kinematics(pose_, action, config_.profile, config_.dt);
  image_ = render_depth(*map_, pose_, config_.camera);
  const bool collided = !map_->bounds.contains(pose_.x, pose_.y) ||
                        check_collision(image_, config_.collision_threshold);
  if (collided) return {std::nullopt, true};
  return {image_, false};
}

StepOutcome<PackedDepth> PackedDepthEnv::step(std::size_t action) {
  auto out = env_.step(static_cast<Action>(action));
  if (out.collided) return {std::nullopt, true};
  return {PackedDepth::pack(*out.next), false};
}

}  // namespace depthq
