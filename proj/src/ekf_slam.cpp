#include "uwbslam/ekf_slam.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace uwbslam {

namespace {

constexpr Eigen::Index kPoseDim = 3;

Eigen::Index landmark_offset(std::size_t j) { return kPoseDim + 2 * static_cast<Eigen::Index>(j); }

bool invertible(const Eigen::Matrix2d& S) {
  const double det = S.determinant();
  return std::isfinite(det) && det > std::numeric_limits<double>::min() && S(0, 0) > 0.0 &&
         S(1, 1) > 0.0;
}

struct Innovation {
  Eigen::Vector2d nu;
  Eigen::Matrix<double, 2, 5> H;
  Eigen::Matrix2d S;
};

// Throws DegenerateGeometry when the landmark sits on the robot.
Innovation innovation(const SlamState& state, const RangeBearingObs& z, std::size_t j,
                      const Eigen::Matrix2d& Q) {
  const Pose2D pose = state.pose();
  const WorldPoint m = state.landmark(j);
  const RangeBearingObs predicted = world_to_obs(pose, m);
  Innovation inn;
  inn.nu = Eigen::Vector2d(z.r - predicted.r, wrap_angle(z.phi - predicted.phi));
  inn.H = measurement_jacobian(pose, m);

  const Eigen::Index off = landmark_offset(j);
  Eigen::Matrix<double, 5, 5> local;
  local.topLeftCorner<3, 3>() = state.cov.topLeftCorner<3, 3>();
  local.topRightCorner<3, 2>() = state.cov.block<3, 2>(0, off);
  local.bottomLeftCorner<2, 3>() = state.cov.block<2, 3>(off, 0);
  local.bottomRightCorner<2, 2>() = state.cov.block<2, 2>(off, off);
  inn.S = inn.H * local * inn.H.transpose() + Q;
  return inn;
}

}  // namespace

NoiseConfig NoiseConfig::from_sigmas(double sigma_x, double sigma_y, double sigma_theta,
                                     double sigma_r, double sigma_phi, double alpha) {
  NoiseConfig cfg;
  cfg.R = Eigen::Vector3d(sigma_x * sigma_x, sigma_y * sigma_y, sigma_theta * sigma_theta).asDiagonal();
  cfg.Q = Eigen::Vector2d(sigma_r * sigma_r, sigma_phi * sigma_phi).asDiagonal();
  cfg.alpha = alpha;
  return cfg;
}

void NoiseConfig::validate() const {
  for (int i = 0; i < 3; ++i) {
    if (!(R(i, i) > 0.0)) {
      throw std::invalid_argument("R diagonal entries must be > 0");
    }
  }
  for (int i = 0; i < 2; ++i) {
    if (!(Q(i, i) > 0.0)) {
      throw std::invalid_argument("Q diagonal entries must be > 0");
    }
  }
  if (!(alpha > 0.0)) {
    throw std::invalid_argument("alpha must be > 0");
  }
}

WorldPoint SlamState::landmark(std::size_t j) const {
  const Eigen::Index off = landmark_offset(j);
  return {mean(off), mean(off + 1)};
}

Eigen::Matrix2d SlamState::landmark_cov(std::size_t j) const {
  const Eigen::Index off = landmark_offset(j);
  return cov.block<2, 2>(off, off);
}

void symmetrize(Eigen::MatrixXd& cov) {
  cov = 0.5 * (cov + cov.transpose()).eval();
}

Eigen::Matrix3d motion_jacobian(const Pose2D& pose, const Pose2D& u) {
  const double c = std::cos(pose.theta);
  const double s = std::sin(pose.theta);
  Eigen::Matrix3d G = Eigen::Matrix3d::Identity();
  G(0, 2) = -s * u.x - c * u.y;
  G(1, 2) = c * u.x - s * u.y;
  return G;
}

Eigen::Matrix<double, 2, 5> measurement_jacobian(const Pose2D& pose, const WorldPoint& landmark) {
  const double dx = landmark.x - pose.x;
  const double dy = landmark.y - pose.y;
  const double q = dx * dx + dy * dy;
  const double r = std::sqrt(q);
  if (r == 0.0) {
    throw DegenerateGeometry("measurement_jacobian: landmark coincides with robot position");
  }
  Eigen::Matrix<double, 2, 5> H;
  H << -dx / r, -dy / r, 0.0, dx / r, dy / r,
       dy / q, -dx / q, -1.0, -dy / q, dx / q;
  return H;
}

void predict(SlamState& state, const Pose2D& u, const Eigen::Matrix3d& R) {
  const Pose2D pose = state.pose();
  const Eigen::Matrix3d G = motion_jacobian(pose, u);
  const Pose2D moved = compose(pose, u);
  state.mean(0) = moved.x;
  state.mean(1) = moved.y;
  state.mean(2) = moved.theta;

  const Eigen::Index n = state.cov.rows();
  const Eigen::Matrix3d pose_block = G * state.cov.topLeftCorner<3, 3>() * G.transpose() + R;
  state.cov.topLeftCorner<3, 3>() = pose_block;
  if (n > kPoseDim) {
    const Eigen::MatrixXd cross = G * state.cov.topRightCorner(3, n - kPoseDim);
    state.cov.topRightCorner(3, n - kPoseDim) = cross;
    state.cov.bottomLeftCorner(n - kPoseDim, 3) = cross.transpose();
  }
  symmetrize(state.cov);
}

std::optional<double> mahalanobis_distance(const SlamState& state, const RangeBearingObs& z,
                                           std::size_t j, const Eigen::Matrix2d& Q) {
  const Innovation inn = innovation(state, z, j, Q);
  if (!invertible(inn.S)) {
    return std::nullopt;
  }
  const double d2 = inn.nu.dot(inn.S.inverse() * inn.nu);
  return std::sqrt(std::max(d2, 0.0));
}

Association associate(const SlamState& state, const RangeBearingObs& z, const Eigen::Matrix2d& Q,
                      double alpha) {
  Association result;
  result.distance = std::numeric_limits<double>::infinity();
  std::optional<std::size_t> best;
  for (std::size_t j = 0; j < state.landmark_count(); ++j) {
    std::optional<double> dist;
    try {
      dist = mahalanobis_distance(state, z, j, Q);
    } catch (const DegenerateGeometry&) {
      result.diagnostics.push_back("landmark " + std::to_string(j) + " coincides with robot pose");
      continue;
    }
    if (!dist) {
      result.diagnostics.push_back("singular innovation covariance for landmark " + std::to_string(j));
      continue;
    }
    if (*dist < result.distance) {
      result.distance = *dist;
      best = j;
    }
  }
  if (best && result.distance < alpha) {
    result.landmark = best;
  }
  return result;
}

bool update(SlamState& state, const RangeBearingObs& z, std::size_t j, const Eigen::Matrix2d& Q) {
  if (j >= state.landmark_count()) {
    throw std::out_of_range("update: landmark index out of range");
  }
  Innovation inn;
  try {
    inn = innovation(state, z, j, Q);
  } catch (const DegenerateGeometry&) {
    return false;
  }
  if (!invertible(inn.S)) {
    return false;
  }
  const Eigen::Index off = landmark_offset(j);
  const Eigen::Matrix<double, 3, 2> Hp_t = inn.H.leftCols<3>().transpose();
  const Eigen::Matrix<double, 2, 2> Hm_t = inn.H.rightCols<2>().transpose();

  // Sigma H^T exploiting that H touches only the pose and landmark j.
  const Eigen::MatrixXd PHt = state.cov.leftCols(3) * Hp_t + state.cov.middleCols(off, 2) * Hm_t;
  const Eigen::MatrixXd K = PHt * inn.S.inverse();

  state.mean += K * inn.nu;
  state.mean(2) = wrap_angle(state.mean(2));

  // Joseph form: A Sigma A^T + K Q K^T with A = I - K H.
  const Eigen::MatrixXd A_sigma = state.cov - K * PHt.transpose();
  const Eigen::MatrixXd A_sigma_Ht = A_sigma.leftCols(3) * Hp_t + A_sigma.middleCols(off, 2) * Hm_t;
  state.cov = A_sigma - A_sigma_Ht * K.transpose() + K * Q * K.transpose();
  symmetrize(state.cov);
  return true;
}

void augment(SlamState& state, const RangeBearingObs& z, const Eigen::Matrix2d& Q) {
  const Pose2D pose = state.pose();
  const WorldPoint m = obs_to_world(pose, z);
  const double heading = pose.theta + z.phi;
  const double c = std::cos(heading);
  const double s = std::sin(heading);

  Eigen::Matrix<double, 2, 3> J_pose;
  J_pose << 1.0, 0.0, -z.r * s,
            0.0, 1.0, z.r * c;
  Eigen::Matrix2d J_z;
  J_z << c, -z.r * s,
         s, z.r * c;

  const Eigen::Index n = state.cov.rows();
  const Eigen::MatrixXd cross = J_pose * state.cov.topRows(3);  // 2 x n
  const Eigen::Matrix2d lm_cov =
      J_pose * state.cov.topLeftCorner<3, 3>() * J_pose.transpose() + J_z * Q * J_z.transpose();

  state.mean.conservativeResize(n + 2);
  state.mean(n) = m.x;
  state.mean(n + 1) = m.y;

  state.cov.conservativeResize(n + 2, n + 2);
  state.cov.block(n, 0, 2, n) = cross;
  state.cov.block(0, n, n, 2) = cross.transpose();
  state.cov.block<2, 2>(n, n) = lm_cov;
  symmetrize(state.cov);
}

StepReport step(SlamState& state, const Pose2D& u, std::span<const RangeBearingObs> observations,
                const NoiseConfig& noise) {
  StepReport report;
  predict(state, u, noise.R);
  for (const RangeBearingObs& z : observations) {
    ObservationOutcome outcome;
    outcome.z = z;
    Association assoc = associate(state, z, noise.Q, noise.alpha);
    for (auto& msg : assoc.diagnostics) {
      report.diagnostics.push_back(std::move(msg));
    }
    outcome.distance = assoc.distance;
    if (assoc.landmark) {
      outcome.landmark = assoc.landmark;
      outcome.assigned = *assoc.landmark;
      outcome.applied = update(state, z, *assoc.landmark, noise.Q);
      if (!outcome.applied) {
        report.diagnostics.push_back("update skipped: singular innovation covariance for landmark " +
                                     std::to_string(*assoc.landmark));
      }
    } else {
      outcome.assigned = state.landmark_count();
      augment(state, z, noise.Q);
    }
    report.outcomes.push_back(outcome);
  }
  return report;
}

}  // namespace uwbslam
