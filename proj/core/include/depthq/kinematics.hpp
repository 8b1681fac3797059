#pragma once

#include "depthq/actions.hpp"
#include "depthq/world.hpp"

namespace depthq {

/// Command speed table; training runs slightly faster than testing.
enum class SpeedProfile { Train, Test };

struct Twist {
  double angular = 0.0;  // rad/s, positive turns left
  double linear = 0.0;   // m/s
};

Twist command_twist(Action action, SpeedProfile profile);

/// Wraps an angle into (-pi, pi].
double normalize_angle(double angle);

/// Exact unicycle integration over dt: a circular arc of radius v/w, or a
/// straight segment when w*dt is negligible.
Pose step_kinematics(const Pose& pose, const Twist& twist, double dt);
Pose step_kinematics(const Pose& pose, Action action, SpeedProfile profile, double dt);

}  // namespace depthq
