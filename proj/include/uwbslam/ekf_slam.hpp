#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "uwbslam/geometry.hpp"

namespace uwbslam {

/// Motion noise R (per state increment), observation noise Q and the
/// Mahalanobis gate. The gate applies to the distance itself, not its square.
struct NoiseConfig {
  Eigen::Matrix3d R = Eigen::Vector3d(1e-8, 1e-8, 4e-4).asDiagonal();
  Eigen::Matrix2d Q = Eigen::Vector2d(0.0225, 1.0).asDiagonal();
  double alpha = 0.6;

  static NoiseConfig from_sigmas(double sigma_x, double sigma_y, double sigma_theta,
                                 double sigma_r, double sigma_phi, double alpha);
  void validate() const;
};

/// Joint mean [x, y, theta, m1x, m1y, ...] and covariance.
struct SlamState {
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(3);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(3, 3);

  std::size_t landmark_count() const { return (static_cast<std::size_t>(mean.size()) - 3) / 2; }
  std::size_t dim() const { return static_cast<std::size_t>(mean.size()); }
  Pose2D pose() const { return {mean(0), mean(1), mean(2)}; }
  WorldPoint landmark(std::size_t j) const;
  Eigen::Matrix2d landmark_cov(std::size_t j) const;
  Eigen::Matrix3d pose_cov() const { return cov.topLeftCorner<3, 3>(); }
};

/// d compose(pose, u) / d pose.
Eigen::Matrix3d motion_jacobian(const Pose2D& pose, const Pose2D& u);

/// d world_to_obs / d [x, y, theta, mx, my].
Eigen::Matrix<double, 2, 5> measurement_jacobian(const Pose2D& pose, const WorldPoint& landmark);

/// Moves the pose mean by `u` and propagates Sigma = G Sigma G^T + F^T R F.
void predict(SlamState& state, const Pose2D& u, const Eigen::Matrix3d& R);

struct Association {
  std::optional<std::size_t> landmark;  // empty = new landmark
  double distance = 0.0;                // best Mahalanobis distance seen
  std::vector<std::string> diagnostics;
};

/// Mahalanobis distance between `z` and the predicted observation of
/// landmark `j`; empty when the innovation covariance is singular.
std::optional<double> mahalanobis_distance(const SlamState& state, const RangeBearingObs& z,
                                           std::size_t j, const Eigen::Matrix2d& Q);

Association associate(const SlamState& state, const RangeBearingObs& z, const Eigen::Matrix2d& Q,
                      double alpha);

/// Joseph-form EKF correction against landmark `j`. Returns false (and
/// leaves the state untouched) when the innovation covariance is singular.
bool update(SlamState& state, const RangeBearingObs& z, std::size_t j, const Eigen::Matrix2d& Q);

/// Appends a landmark initialised from `z` with first-order covariance.
void augment(SlamState& state, const RangeBearingObs& z, const Eigen::Matrix2d& Q);

struct ObservationOutcome {
  RangeBearingObs z;
  std::optional<std::size_t> landmark;  // matched landmark, empty if augmented
  std::size_t assigned = 0;             // index the observation ended up on
  double distance = 0.0;
  bool applied = true;
};

struct StepReport {
  std::vector<ObservationOutcome> outcomes;
  std::vector<std::string> diagnostics;
};

/// One filter cycle: predict once, then associate/update-or-augment each
/// observation sequentially on the partially updated state.
StepReport step(SlamState& state, const Pose2D& u, std::span<const RangeBearingObs> observations,
                const NoiseConfig& noise);

void symmetrize(Eigen::MatrixXd& cov);

}  // namespace uwbslam
