#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "uwbslam/dataset.hpp"
#include "uwbslam/geometry.hpp"

namespace uwbslam {

struct TrajectoryPair {
  std::vector<StampedPose> estimated;
  std::vector<StampedPose> reference;
};

/// Planar rigid transform p -> R(theta) p + t, no scale.
struct RigidTransform2D {
  double theta = 0.0;
  double tx = 0.0;
  double ty = 0.0;

  WorldPoint apply(const WorldPoint& p) const;
  Pose2D apply(const Pose2D& p) const;
};

/// (estimated index, reference index) pairs matched by nearest timestamp,
/// accepting offsets up to half the reference sampling interval.
std::vector<std::pair<std::size_t, std::size_t>> timestamp_correspondences(const TrajectoryPair& pair);

/// Closed-form least-squares rigid alignment of corresponded positions.
/// Returns the transform that maps the estimate onto the reference. Throws
/// std::invalid_argument with fewer than two correspondences.
RigidTransform2D align(const TrajectoryPair& pair);

/// RMS position error after applying `transform` to the estimate.
double rms_ate(const TrajectoryPair& pair, const RigidTransform2D& transform);

/// align() followed by rms_ate().
double aligned_rms_ate(const TrajectoryPair& pair);

struct LandmarkMatch {
  std::size_t estimated = 0;
  std::size_t truth = 0;
  double error = 0.0;
};

struct MapError {
  double mean_error = 0.0;  // over matches; 0 when nothing matched
  std::vector<LandmarkMatch> matches;
  std::vector<std::size_t> unmatched_estimated;
  std::vector<std::size_t> unmatched_truth;
};

inline constexpr double kMapMatchGate = 0.5;  // m

/// Greedy nearest-neighbour matching of the transformed estimated map.
MapError map_error(const std::vector<WorldPoint>& estimated, const std::vector<WorldPoint>& truth,
                   const RigidTransform2D& transform = {}, double gate = kMapMatchGate);

}  // namespace uwbslam
