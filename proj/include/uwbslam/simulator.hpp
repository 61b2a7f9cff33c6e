#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "uwbslam/dataset.hpp"
#include "uwbslam/geometry.hpp"

namespace uwbslam {

struct SimWorld {
  std::vector<Landmark> landmarks;
  double clutter_rate = 0.0;  // expected spurious echoes per frame
  double clutter_amp_min = 0.006;
  double clutter_amp_max = 0.015;
  std::uint64_t seed = 0;
};

struct OdomNoiseModel {
  double sigma_translation = 0.0;  // m per moving tick, on each body axis
  double sigma_rotation = 0.0;     // rad per moving tick
  double drift_bias = 0.0;         // rad per metre travelled (positive = anticlockwise)
};

struct Segment {
  enum class Kind { Straight, Turn };
  Kind kind = Kind::Straight;
  double amount = 0.0;  // metres, or signed radians for a turn
  double speed = 0.05;  // m/s, or rad/s (magnitude) for a turn
};

struct TrajectoryScript {
  std::vector<Segment> segments;
  double radar_rate = 5.0;  // Hz
};

/// Forward model of a single radar echo and of the frame noise floor.
struct EchoModel {
  std::size_t bins = kRawFrameBins;
  double bin0_range = kDefaultBin0Range;
  double bin_spacing = kDefaultBinSpacing;
  double pulse_width_bins = 3.0;  // Gaussian standard deviation
  double range_exponent = 2.0;
  double noise_sigma = 5e-4;
};

struct Scenario {
  std::string name;
  SimWorld world;
  TrajectoryScript script;
  OdomNoiseModel odom_noise;
  EchoModel echo;
  RigConfig rig;
  SignalConfig signal;
};

/// Ground-truth poses sampled at the radar rate, starting at the origin.
std::vector<StampedPose> integrate_script(const TrajectoryScript& script);

/// Antenna gain over the lobe: cosine taper, zero outside +-fov/2.
double antenna_gain(double off_boresight, double theta_fov);

/// Noiseless echo amplitudes for one sensor pose (no clutter, no noise).
std::vector<double> echo_profile(const Pose2D& sensor_pose, double theta_fov,
                                 const std::vector<Landmark>& landmarks, const EchoModel& echo);

/// Validates the scenario and throws std::invalid_argument on bad input.
void validate_scenario(const Scenario& scenario);

/// Deterministic given scenario.world.seed.
Dataset simulate(const Scenario& scenario);

/// Square loop (4 m side, traversed twice, anticlockwise) past eight point
/// landmarks; drifting odometry.
Scenario square_loop_scenario();

/// Straight 2 m pass beside one landmark on the left boresight.
Scenario single_landmark_scenario();

/// Scenario by name ("square_loop", "single_landmark") or JSON file path.
Scenario load_scenario(const std::string& name_or_path);

/// Landmarks that came within `max_range` of some sensor inside its lobe at
/// any ground-truth pose.
std::vector<std::size_t> landmarks_in_fov(const std::vector<StampedPose>& trajectory,
                                          const RigConfig& rig, const std::vector<Landmark>& landmarks,
                                          double max_range);

}  // namespace uwbslam
