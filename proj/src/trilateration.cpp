#include "uwbslam/trilateration.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace uwbslam {

SensorPairGeometry SensorPairGeometry::left() { return {}; }

SensorPairGeometry SensorPairGeometry::right() {
  SensorPairGeometry g;
  g.side = PairSide::Right;
  g.sensor_ids = {"R1", "R2"};
  g.mount_yaw = -kPi / 2.0;
  return g;
}

void SensorPairGeometry::validate() const {
  if (!(d > 0.0)) {
    throw std::invalid_argument("d must be > 0");
  }
  if (!(s >= 0.0)) {
    throw std::invalid_argument("s must be >= 0");
  }
  if (!(theta_fov > 0.0 && theta_fov < kPi)) {
    throw std::invalid_argument("theta_fov must lie in (0, pi)");
  }
  if (sensor_ids[0].empty() || sensor_ids[1].empty() || sensor_ids[0] == sensor_ids[1]) {
    throw std::invalid_argument("sensor_ids must be two distinct non-empty names");
  }
}

WorldPoint SensorPairGeometry::pair_to_base(const WorldPoint& p) const {
  const double lateral = side == PairSide::Left ? p.y : -p.y;
  const double rot = side == PairSide::Left ? mount_yaw - kPi / 2.0 : mount_yaw + kPi / 2.0;
  const double c = std::cos(rot);
  const double sn = std::sin(rot);
  return {c * p.x - sn * lateral, sn * p.x + c * lateral};
}

double SensorPairGeometry::pair_bearing_to_base(double phi_pair) const {
  if (side == PairSide::Left) {
    return wrap_angle(phi_pair + mount_yaw - kPi / 2.0);
  }
  return wrap_angle(-phi_pair + mount_yaw + kPi / 2.0);
}

std::array<Pose2D, 2> SensorPairGeometry::sensor_mounts() const {
  const WorldPoint p1 = pair_to_base({-d / 2.0, s});
  const WorldPoint p2 = pair_to_base({d / 2.0, s});
  return {Pose2D{p1.x, p1.y, wrap_angle(mount_yaw)}, Pose2D{p2.x, p2.y, wrap_angle(mount_yaw)}};
}

double gamma(const SensorPairGeometry& geom) { return (kPi - geom.theta_fov) / 2.0; }

std::optional<PairFrameSolution> solve_pair_frame(const PairedDetection& pd,
                                                  const SensorPairGeometry& geom) {
  const double l1 = pd.l1;
  const double l2 = pd.l2;
  const double d = geom.d;
  if (!(l1 > 0.0 && l2 > 0.0)) {
    return std::nullopt;
  }
  if (!(std::abs(l1 - l2) < d && d < l1 + l2)) {
    return std::nullopt;
  }
  const double cos_alpha = std::clamp((l1 * l1 + d * d - l2 * l2) / (2.0 * l1 * d), -1.0, 1.0);
  const double cos_beta = std::clamp((l2 * l2 + d * d - l1 * l1) / (2.0 * l2 * d), -1.0, 1.0);
  PairFrameSolution sol;
  sol.alpha = std::acos(cos_alpha);
  sol.beta = std::acos(cos_beta);
  const double g = gamma(geom);
  if (sol.alpha <= g || sol.beta <= g) {
    return std::nullopt;
  }
  const double px = l1 * cos_alpha - d / 2.0;
  const double py = l1 * std::sin(sol.alpha) + geom.s;
  sol.r = std::hypot(px, py);
  sol.phi_pair = std::atan2(py, px);
  return sol;
}

std::optional<RangeBearingObs> trilaterate(const PairedDetection& pd,
                                           const SensorPairGeometry& geom,
                                           std::int64_t state_id) {
  const auto sol = solve_pair_frame(pd, geom);
  if (!sol) {
    return std::nullopt;
  }
  RangeBearingObs obs;
  obs.r = sol->r;
  obs.phi = geom.pair_bearing_to_base(sol->phi_pair);
  obs.source_pair = geom.side;
  obs.state_id = state_id;
  return obs;
}

std::vector<RangeBearingObs> trilaterate_all(const std::vector<RangeDetection>& sensor1,
                                             const std::vector<RangeDetection>& sensor2,
                                             const SensorPairGeometry& geom,
                                             std::int64_t state_id) {
  std::vector<RangeBearingObs> out;
  for (const auto& a : sensor1) {
    for (const auto& b : sensor2) {
      if (auto obs = trilaterate({a.range, b.range}, geom, state_id)) {
        out.push_back(*obs);
      }
    }
  }
  return out;
}

}  // namespace uwbslam
