#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "depthq/depth_camera.hpp"
#include "depthq/kinematics.hpp"
#include "depthq/random.hpp"
#include "depthq/world.hpp"

namespace depthq {

struct EnvConfig {
  CameraConfig camera;
  SpeedProfile profile = SpeedProfile::Train;
  /// Duration of one moving command, seconds.
  double dt = 0.4;
  double collision_threshold = 0.55;

  void validate() const;
};

/// Outcome of one environment step. `next` is empty exactly when the step
/// ended in a collision.
template <class State>
struct StepOutcome {
  std::optional<State> next;
  bool collided = false;
};

/// Depth image quantized to millimeters, the storage form of replay states.
struct PackedDepth {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint16_t> millimeters;

  static PackedDepth pack(const DepthImage& image);
  DepthImage unpack() const;
  friend bool operator==(const PackedDepth&, const PackedDepth&) = default;
};

/// The simulated robot in a world: sets start poses, applies commands and
/// renders the depth camera. Collision is decided from the rendered image
/// only; leaving the map bounds also counts as a collision.
class DepthEnv {
 public:
  DepthEnv(const WorldMap& map, EnvConfig config);

  /// Places the robot at start `index` (0-based) and returns the first image.
  DepthImage reset_to(std::size_t index, const Pose& pose);
  DepthImage reset_to(std::size_t index);
  /// Uniformly random start.
  DepthImage reset(Rng& rng);

  StepOutcome<DepthImage> step(Action action);

  const Pose& pose() const { return pose_; }
  std::size_t start_index() const { return start_index_; }
  const DepthImage& image() const { return image_; }
  const WorldMap& map() const { return *map_; }
  const EnvConfig& config() const { return config_; }

 private:
  const WorldMap* map_;
  EnvConfig config_;
  Pose pose_;
  std::size_t start_index_ = 0;
  DepthImage image_;
};

/// DepthEnv seen through PackedDepth states, for the replay-based trainer.
class PackedDepthEnv {
 public:
  using State = PackedDepth;

  PackedDepthEnv(const WorldMap& map, EnvConfig config) : env_(map, std::move(config)) {}

  PackedDepth reset(Rng& rng) { return PackedDepth::pack(env_.reset(rng)); }
  StepOutcome<PackedDepth> step(std::size_t action);
  std::size_t start_index() const { return env_.start_index(); }
  const DepthEnv& inner() const { return env_; }

 private:
  DepthEnv env_;
};

}  // namespace depthq
