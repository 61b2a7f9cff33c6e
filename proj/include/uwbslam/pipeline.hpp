#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "uwbslam/config.hpp"
#include "uwbslam/dataset.hpp"
#include "uwbslam/ekf_slam.hpp"
#include "uwbslam/outlier_filter.hpp"

namespace uwbslam {

/// A state created by the min_disp gate, with its raw trilaterated points.
struct StateRecord {
  std::int64_t state_id = 0;
  double t = 0.0;
  Pose2D odom;
  std::vector<RangeBearingObs> raw;
  std::optional<std::vector<RangeBearingObs>> filtered;  // set once the EKF consumed the state
};

struct StepSnapshot {
  std::int64_t state_id = 0;
  double t = 0.0;
  Pose2D odom;
  Pose2D slam;
  Eigen::Matrix3d pose_cov = Eigen::Matrix3d::Zero();
  std::size_t landmarks = 0;
  std::size_t updates = 0;
  std::size_t augmented = 0;
};

struct RunResult {
  std::vector<StateRecord> states;
  std::vector<StepSnapshot> steps;
  SlamState final_state;
  std::vector<std::string> diagnostics;
};

/// Replay of a dataset: min_disp-gated state creation, per-pair frame
/// processing and trilateration, the provisional window, and one EKF step
/// per filled window.
class Pipeline {
 public:
  using StepObserver = std::function<void(const StepSnapshot&, const SlamState&)>;

  Pipeline(RigConfig rig, RunConfig cfg);

  void set_step_observer(StepObserver observer) { observer_ = std::move(observer); }

  /// One tick: an optional odometry sample plus the frames sharing its timestamp.
  void process_tick(double t, const std::optional<Pose2D>& odom, const std::vector<const FrameRecord*>& frames);

  const RunResult& result() const { return result_; }
  RunResult take_result();

 private:
  std::vector<RangeBearingObs> observe(const std::vector<const FrameRecord*>& frames, std::int64_t state_id) const;

  RigConfig rig_;
  RunConfig cfg_;
  NoiseConfig noise_;
  ProvisionalWindow window_;
  SlamState slam_;
  std::optional<Pose2D> previous_pose_;
  Pose2D last_estimated_odom_;  // Odom[s - 1]
  std::int64_t next_state_id_ = 1;
  StepObserver observer_;
  RunResult result_;
};

/// Rig from the dataset with the config geometry override applied.
RigConfig effective_rig(const DatasetHeader& header, const RunConfig& cfg);

RunResult run_pipeline(const Dataset& dataset, const RunConfig& cfg,
                       Pipeline::StepObserver observer = {});

}  // namespace uwbslam
