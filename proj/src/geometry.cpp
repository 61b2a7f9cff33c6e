#include "uwbslam/geometry.hpp"

#include <cmath>

namespace uwbslam {

double wrap_angle(double angle) {
  if (angle > -kPi && angle <= kPi) {
    return angle;
  }
  double wrapped = std::remainder(angle, 2.0 * kPi);  // [-pi, pi]
  if (wrapped <= -kPi) {
    wrapped += 2.0 * kPi;
  }
  return wrapped;
}

Pose2D compose(const Pose2D& a, const Pose2D& b) {
  const double c = std::cos(a.theta);
  const double s = std::sin(a.theta);
  return {a.x + c * b.x - s * b.y, a.y + s * b.x + c * b.y,
          wrap_angle(a.theta + b.theta)};
}

Pose2D inverse(const Pose2D& a) {
  const double c = std::cos(a.theta);
  const double s = std::sin(a.theta);
  return {-c * a.x - s * a.y, s * a.x - c * a.y, wrap_angle(-a.theta)};
}

Pose2D relative(const Pose2D& a, const Pose2D& b) {
  const double c = std::cos(a.theta);
  const double s = std::sin(a.theta);
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  return {c * dx + s * dy, -s * dx + c * dy, wrap_angle(b.theta - a.theta)};
}

WorldPoint obs_to_world(const Pose2D& pose, const RangeBearingObs& obs) {
  const double heading = pose.theta + obs.phi;
  return {pose.x + obs.r * std::cos(heading), pose.y + obs.r * std::sin(heading)};
}

RangeBearingObs world_to_obs(const Pose2D& pose, const WorldPoint& pt) {
  const double dx = pt.x - pose.x;
  const double dy = pt.y - pose.y;
  const double r = std::hypot(dx, dy);
  if (r == 0.0) {
    throw DegenerateGeometry("world_to_obs: point coincides with robot position");
  }
  RangeBearingObs obs;
  obs.r = r;
  obs.phi = wrap_angle(std::atan2(dy, dx) - pose.theta);
  return obs;
}

double distance(const WorldPoint& a, const WorldPoint& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

}  // namespace uwbslam
