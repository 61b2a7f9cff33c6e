#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "uwbslam/geometry.hpp"
#include "uwbslam/radar_frontend.hpp"

namespace uwbslam {

/// Two co-mounted sensors on one side of the robot.
///
/// Pair frame: x runs along the baseline from sensor 1 to sensor 2, y along
/// the shared boresight, origin at the base footprint. Sensor 1 sits at
/// (-d/2, s) and sensor 2 at (d/2, s). `mount_yaw` is the boresight heading
/// in the base frame. The right pair mirrors the lateral axis so that on both
/// sides sensor 1 is the rear one when the boresights point sideways.
struct SensorPairGeometry {
  double d = 0.20;
  double s = 0.20;
  double theta_fov = deg_to_rad(65.0);
  PairSide side = PairSide::Left;
  std::array<std::string, 2> sensor_ids{"L1", "L2"};
  double mount_yaw = kPi / 2.0;

  static SensorPairGeometry left();
  static SensorPairGeometry right();

  void validate() const;

  /// Sensor poses in the base frame; heading is the sensor boresight.
  std::array<Pose2D, 2> sensor_mounts() const;

  /// Maps a pair-frame point / bearing into the base frame.
  WorldPoint pair_to_base(const WorldPoint& p) const;
  double pair_bearing_to_base(double phi_pair) const;
};

struct PairedDetection {
  double l1 = 0.0;
  double l2 = 0.0;
};

/// Half of the angle left outside the azimuth opening: (pi - fov) / 2.
double gamma(const SensorPairGeometry& geom);

/// Pair-frame solution before the mounting transform.
struct PairFrameSolution {
  double alpha = 0.0;
  double beta = 0.0;
  double r = 0.0;
  double phi_pair = 0.0;
};

/// Intersects the two range circles. Empty when the circles do not cross or
/// the intersection lies outside the shared field of view.
std::optional<PairFrameSolution> solve_pair_frame(const PairedDetection& pd,
                                                  const SensorPairGeometry& geom);

std::optional<RangeBearingObs> trilaterate(const PairedDetection& pd,
                                           const SensorPairGeometry& geom,
                                           std::int64_t state_id = 0);

/// Every combination of the two sensors' detections; accepted intersections
/// are returned in (sensor-1 index, sensor-2 index) order.
std::vector<RangeBearingObs> trilaterate_all(const std::vector<RangeDetection>& sensor1,
                                             const std::vector<RangeDetection>& sensor2,
                                             const SensorPairGeometry& geom,
                                             std::int64_t state_id = 0);

}  // namespace uwbslam
