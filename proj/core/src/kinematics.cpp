#include "depthq/kinematics.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace depthq {

namespace {

constexpr std::array<double, kNumActions> kTrainAngular{1.4, 0.7, 0.0, -0.7, -1.4};
constexpr std::array<double, kNumActions> kTestAngular{1.2, 0.6, 0.0, -0.6, -1.2};
constexpr double kTrainLinear = 0.32;
constexpr double kTestLinear = 0.25;

}  // namespace

Twist command_twist(Action action, SpeedProfile profile) {
  const auto i = index_of(action);
  return profile == SpeedProfile::Train ? Twist{kTrainAngular[i], kTrainLinear}
                                        : Twist{kTestAngular[i], kTestLinear};
}

double normalize_angle(double angle) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double a = std::fmod(angle, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  if (a > std::numbers::pi) a -= two_pi;
  return a;
}

Pose step_kinematics(const Pose& pose, const Twist& twist, double dt) {
  const double turn = twist.angular * dt;
  // Chord of the arc, taken along the mean heading. 2 sin(turn/2)/w -> dt as w -> 0.
  const double chord = std::abs(turn) < 1e-9 ? twist.linear * dt
                                             : 2.0 * twist.linear * std::sin(0.5 * turn) / twist.angular;
  const double mid = pose.theta + 0.5 * turn;
  return Pose{pose.x + chord * std::cos(mid), pose.y + chord * std::sin(mid),
              normalize_angle(pose.theta + turn)};
}

Pose step_kinematics(const Pose& pose, Action action, SpeedProfile profile, double dt) {
  return step_kinematics(pose, command_twist(action, profile), dt);
}

}  // namespace depthq
