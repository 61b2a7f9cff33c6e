#pragma once

#include <cstdint>
#include <numbers>
#include <stdexcept>

namespace uwbslam {

/// Wraps an angle into (-pi, pi].
double wrap_angle(double angle);

/// Planar robot pose. Heading is kept in (-pi, pi] by every operation here.
struct Pose2D {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
};

struct WorldPoint {
  double x = 0.0;
  double y = 0.0;
};

enum class PairSide : std::uint8_t { Left, Right };

/// Range-bearing observation in the robot base frame.
struct RangeBearingObs {
  double r = 0.0;
  double phi = 0.0;
  PairSide source_pair = PairSide::Left;
  std::int64_t state_id = 0;
};

/// Thrown when the bearing to a point is undefined (point sits on the robot).
class DegenerateGeometry : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// a (+) b: b expressed in a's frame, mapped to the frame a lives in.
Pose2D compose(const Pose2D& a, const Pose2D& b);

Pose2D inverse(const Pose2D& a);

/// a^-1 (+) b, i.e. the motion increment that takes a to b.
Pose2D relative(const Pose2D& a, const Pose2D& b);

WorldPoint obs_to_world(const Pose2D& pose, const RangeBearingObs& obs);

/// Predicted measurement of a world point. Throws DegenerateGeometry when
/// the point coincides with the robot position.
RangeBearingObs world_to_obs(const Pose2D& pose, const WorldPoint& pt);

double distance(const WorldPoint& a, const WorldPoint& b);

inline constexpr double kPi = std::numbers::pi;

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }

}  // namespace uwbslam
