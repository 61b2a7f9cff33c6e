#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "uwbslam/config.hpp"
#include "uwbslam/dataset.hpp"
#include "uwbslam/evaluation.hpp"
#include "uwbslam/pipeline.hpp"

namespace uwbslam {

inline constexpr int kRunFormatVersion = 1;
inline constexpr int kReportFormatVersion = 1;

/// Covariance ellipse at one standard deviation.
struct Ellipse {
  double semi_major = 0.0;
  double semi_minor = 0.0;
  double angle = 0.0;  // of the major axis, rad from +x
};

Ellipse covariance_ellipse(const Eigen::Matrix2d& cov);

struct MapLandmark {
  std::size_t id = 0;
  WorldPoint position;
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
};

struct PoseLogEntry {
  std::int64_t state_id = 0;
  double t = 0.0;
  Pose2D odom;
  Pose2D slam;
};

/// What the eval and plot commands need from a run directory.
struct RunArtifacts {
  std::vector<PoseLogEntry> poses;
  std::vector<MapLandmark> landmarks;
  std::optional<GroundTruth> ground_truth;
};

/// Writes run.json, poses.jsonl, map.json, observations.jsonl and the CSV
/// summaries into `dir`, creating it if needed.
void write_run_outputs(const std::string& dir, const Dataset& dataset, const RunConfig& cfg,
                       const RunResult& result);

/// Throws std::runtime_error on missing or malformed files.
RunArtifacts read_run_outputs(const std::string& dir);

RunArtifacts artifacts_from_result(const RunResult& result, const std::optional<GroundTruth>& truth);

struct TrajectoryMetrics {
  double ate_rms = 0.0;
  double final_pose_error = 0.0;  // unaligned, at the last logged pose
  RigidTransform2D alignment;
};

struct EvalReport {
  std::size_t poses = 0;
  TrajectoryMetrics slam;
  TrajectoryMetrics odometry;
  MapError map;
  std::size_t truth_landmarks = 0;
  std::size_t estimated_landmarks = 0;
};

/// Throws std::invalid_argument when the ground truth is missing or when
/// fewer than two poses correspond.
EvalReport evaluate(const RunArtifacts& run, const GroundTruth& truth);

std::string report_to_json(const EvalReport& report);

/// t, ground truth, and aligned odometry and SLAM positions per logged pose.
std::string trajectories_csv(const RunArtifacts& run, const GroundTruth& truth, const EvalReport& report);

/// Ground truth, odometry, SLAM trajectory and 2-sigma landmark ellipses.
std::string render_svg(const RunArtifacts& run);

}  // namespace uwbslam
