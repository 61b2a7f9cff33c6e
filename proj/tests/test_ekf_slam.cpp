#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>
#include <random>

#include "uwbslam/ekf_slam.hpp"

using namespace uwbslam;

namespace {

Pose2D random_pose(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pos(-5.0, 5.0);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  return {pos(rng), pos(rng), ang(rng)};
}

Eigen::MatrixXd random_spd(std::mt19937_64& rng, Eigen::Index n, double scale) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd A(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      A(i, j) = g(rng);
    }
  }
  return scale * (A * A.transpose() + 0.1 * Eigen::MatrixXd::Identity(n, n));
}

SlamState state_with(const Pose2D& pose, const std::vector<WorldPoint>& lms, const Eigen::MatrixXd& cov) {
  SlamState s;
  s.mean.resize(3 + 2 * static_cast<Eigen::Index>(lms.size()));
  s.mean.head<3>() << pose.x, pose.y, pose.theta;
  for (std::size_t j = 0; j < lms.size(); ++j) {
    s.mean(3 + 2 * static_cast<Eigen::Index>(j)) = lms[j].x;
    s.mean(4 + 2 * static_cast<Eigen::Index>(j)) = lms[j].y;
  }
  s.cov = cov;
  return s;
}

double min_eigenvalue(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  return es.eigenvalues().minCoeff();
}

// D from the closed-form 2x2 inverse.
double explicit_mahalanobis(const SlamState& s, const RangeBearingObs& z, std::size_t j, const Eigen::Matrix2d& Q) {
  const Pose2D pose = s.pose();
  const WorldPoint m = s.landmark(j);
  const double dx = m.x - pose.x;
  const double dy = m.y - pose.y;
  const double q = dx * dx + dy * dy;
  const double r = std::sqrt(q);
  Eigen::Matrix<double, 2, 5> H;
  H << -dx / r, -dy / r, 0, dx / r, dy / r, dy / q, -dx / q, -1, -dy / q, dx / q;
  const Eigen::Index off = 3 + 2 * static_cast<Eigen::Index>(j);
  std::vector<Eigen::Index> idx{0, 1, 2, off, off + 1};
  Eigen::Matrix<double, 5, 5> P;
  for (int a = 0; a < 5; ++a) {
    for (int b = 0; b < 5; ++b) {
      P(a, b) = s.cov(idx[a], idx[b]);
    }
  }
  const Eigen::Matrix2d S = H * P * H.transpose() + Q;
  const double det = S(0, 0) * S(1, 1) - S(0, 1) * S(1, 0);
  const double nr = z.r - r;
  const double np = wrap_angle(z.phi - (std::atan2(dy, dx) - pose.theta));
  const double d2 = (S(1, 1) * nr * nr - (S(0, 1) + S(1, 0)) * nr * np + S(0, 0) * np * np) / det;
  return std::sqrt(d2);
}

}  // namespace

TEST(MotionJacobian, MatchesCentralDifferences) {
  std::mt19937_64 rng(41);
  const double h = 1e-6;
  for (int trial = 0; trial < 100; ++trial) {
    const Pose2D pose = random_pose(rng);
    const Pose2D u{0.3 * (pose.x / 5.0), 0.2 * (pose.y / 5.0), 0.1 * pose.theta};
    const Eigen::Matrix3d G = motion_jacobian(pose, u);
    for (int k = 0; k < 3; ++k) {
      Pose2D plus = pose;
      Pose2D minus = pose;
      (k == 0 ? plus.x : k == 1 ? plus.y : plus.theta) += h;
      (k == 0 ? minus.x : k == 1 ? minus.y : minus.theta) -= h;
      const Pose2D a = compose(plus, u);
      const Pose2D b = compose(minus, u);
      EXPECT_NEAR(G(0, k), (a.x - b.x) / (2 * h), 1e-6);
      EXPECT_NEAR(G(1, k), (a.y - b.y) / (2 * h), 1e-6);
      EXPECT_NEAR(G(2, k), wrap_angle(a.theta - b.theta) / (2 * h), 1e-6);
    }
  }
}

TEST(MeasurementJacobian, MatchesCentralDifferences) {
  std::mt19937_64 rng(42);
  const double h = 1e-6;
  for (int trial = 0; trial < 100; ++trial) {
    const Pose2D pose = random_pose(rng);
    WorldPoint m = {random_pose(rng).x, random_pose(rng).y};
    if (distance(m, {pose.x, pose.y}) < 0.5) {
      m.x += 1.0;
    }
    const auto H = measurement_jacobian(pose, m);
    for (int k = 0; k < 5; ++k) {
      Pose2D pp = pose, pm = pose;
      WorldPoint mp = m, mm = m;
      switch (k) {
        case 0: pp.x += h; pm.x -= h; break;
        case 1: pp.y += h; pm.y -= h; break;
        case 2: pp.theta += h; pm.theta -= h; break;
        case 3: mp.x += h; mm.x -= h; break;
        default: mp.y += h; mm.y -= h; break;
      }
      const RangeBearingObs a = world_to_obs(pp, mp);
      const RangeBearingObs b = world_to_obs(pm, mm);
      EXPECT_NEAR(H(0, k), (a.r - b.r) / (2 * h), 1e-6);
      EXPECT_NEAR(H(1, k), wrap_angle(a.phi - b.phi) / (2 * h), 1e-6);
    }
  }
}

TEST(Predict, ZeroMotionAddsExactlyR) {
  std::mt19937_64 rng(43);
  SlamState s = state_with({0.5, -0.2, 0.3}, {{1, 1}, {2, -1}}, random_spd(rng, 7, 0.01));
  const SlamState before = s;
  const Eigen::Matrix3d R = Eigen::Vector3d(1e-4, 2e-4, 3e-4).asDiagonal();
  predict(s, {0, 0, 0}, R);
  EXPECT_TRUE(s.mean.isApprox(before.mean, 0.0));
  EXPECT_NEAR((s.cov.topLeftCorner<3, 3>() - before.cov.topLeftCorner<3, 3>() - R).norm(), 0.0, 1e-15);
  EXPECT_NEAR((s.cov.bottomRightCorner(4, 4) - before.cov.bottomRightCorner(4, 4)).norm(), 0.0, 0.0);
}

TEST(Predict, MovesPoseOnly) {
  SlamState s = state_with({0, 0, 0}, {{1, 1}}, Eigen::MatrixXd::Zero(5, 5));
  predict(s, {1, 0, 0}, Eigen::Matrix3d::Identity() * 1e-6);
  EXPECT_DOUBLE_EQ(s.mean(0), 1.0);
  EXPECT_DOUBLE_EQ(s.mean(1), 0.0);
  EXPECT_DOUBLE_EQ(s.mean(2), 0.0);
  EXPECT_DOUBLE_EQ(s.mean(3), 1.0);
  EXPECT_DOUBLE_EQ(s.mean(4), 1.0);
}

TEST(Predict, CrossCovarianceFollowsG) {
  std::mt19937_64 rng(44);
  SlamState s = state_with({0.5, -0.2, 0.7}, {{1, 1}}, random_spd(rng, 5, 0.01));
  const Eigen::MatrixXd before = s.cov;
  const Pose2D u{0.2, 0.05, 0.1};
  const Eigen::Matrix3d G = motion_jacobian(s.pose(), u);
  const Eigen::Matrix3d R = Eigen::Matrix3d::Identity() * 1e-5;
  predict(s, u, R);
  Eigen::MatrixXd Gf = Eigen::MatrixXd::Identity(5, 5);
  Gf.topLeftCorner<3, 3>() = G;
  Eigen::MatrixXd expected = Gf * before * Gf.transpose();
  expected.topLeftCorner<3, 3>() += R;
  EXPECT_LT((s.cov - expected).norm(), 1e-14);
}

TEST(Associate, EmptyMapIsNew) {
  SlamState s;
  RangeBearingObs z;
  z.r = 1.0;
  EXPECT_FALSE(associate(s, z, Eigen::Matrix2d::Identity(), 0.6).landmark);
}

TEST(Associate, ExactPredictionMatches) {
  std::mt19937_64 rng(45);
  SlamState s = state_with({0.1, 0.2, 0.3}, {{1, 1}, {-1, 2}, {2, -2}}, random_spd(rng, 9, 1e-3));
  const RangeBearingObs z = world_to_obs(s.pose(), s.landmark(1));
  const Association a = associate(s, z, Eigen::Matrix2d::Identity() * 0.01, 1e-3);
  ASSERT_TRUE(a.landmark);
  EXPECT_EQ(*a.landmark, 1u);
  EXPECT_NEAR(a.distance, 0.0, 1e-12);
}

TEST(Associate, MidwayBeyondGateIsNew) {
  std::mt19937_64 rng(46);
  SlamState s = state_with({0, 0, 0}, {{1, 1}, {1, -1}}, random_spd(rng, 7, 1e-4));
  const Eigen::Matrix2d Q = Eigen::Vector2d(0.0225, 0.04).asDiagonal();
  RangeBearingObs z;
  z.r = std::sqrt(2.0);
  z.phi = 0.0;
  const double d0 = explicit_mahalanobis(s, z, 0, Q);
  const double d1 = explicit_mahalanobis(s, z, 1, Q);
  EXPECT_NEAR(*mahalanobis_distance(s, z, 0, Q), d0, 1e-12);
  EXPECT_NEAR(*mahalanobis_distance(s, z, 1, Q), d1, 1e-12);
  ASSERT_GT(std::min(d0, d1), 0.6);
  const Association a = associate(s, z, Q, 0.6);
  EXPECT_FALSE(a.landmark);
  EXPECT_NEAR(a.distance, std::min(d0, d1), 1e-12);
}

TEST(Associate, MahalanobisMatchesExplicitInverse) {
  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    const SlamState s = state_with(random_pose(rng), {{u(rng) + 6, u(rng)}}, random_spd(rng, 5, 1e-3));
    RangeBearingObs z;
    z.r = 3.0 + u(rng);
    z.phi = u(rng);
    const Eigen::Matrix2d Q = Eigen::Vector2d(0.02, 0.5).asDiagonal();
    EXPECT_NEAR(*mahalanobis_distance(s, z, 0, Q), explicit_mahalanobis(s, z, 0, Q), 1e-9);
  }
}

TEST(Associate, InvariantToLandmarkOrder) {
  std::mt19937_64 rng(48);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  const std::vector<WorldPoint> lms{{1, 2}, {-2, 1}, {2.5, -1}, {0.5, -2.5}};
  const Eigen::Matrix2d Q = Eigen::Vector2d(0.0225, 1.0).asDiagonal();
  for (int trial = 0; trial < 50; ++trial) {
    RangeBearingObs z;
    z.r = 1.0 + std::abs(u(rng));
    z.phi = u(rng);
    const SlamState a = state_with({0, 0, 0}, lms, Eigen::MatrixXd::Identity(11, 11) * 1e-3);
    const SlamState b = state_with({0, 0, 0}, {lms[3], lms[2], lms[1], lms[0]}, Eigen::MatrixXd::Identity(11, 11) * 1e-3);
    const Association ra = associate(a, z, Q, 10.0);
    const Association rb = associate(b, z, Q, 10.0);
    ASSERT_EQ(ra.landmark.has_value(), rb.landmark.has_value());
    if (ra.landmark) {
      EXPECT_EQ(3 - *ra.landmark, *rb.landmark);
    }
    EXPECT_NEAR(ra.distance, rb.distance, 1e-12);
  }
}

TEST(Update, ZeroInnovationKeepsMeanAndShrinksTrace) {
  std::mt19937_64 rng(49);
  SlamState s = state_with({0.2, 0.1, 0.5}, {{1.5, 1.0}, {-0.5, 1.2}}, random_spd(rng, 7, 1e-3));
  const SlamState before = s;
  const RangeBearingObs z = world_to_obs(s.pose(), s.landmark(0));
  ASSERT_TRUE(update(s, z, 0, Eigen::Vector2d(0.0225, 1.0).asDiagonal()));
  EXPECT_LT((s.mean - before.mean).norm(), 1e-15);
  EXPECT_LE(s.cov.trace(), before.cov.trace());
  EXPECT_LT((s.cov - s.cov.transpose()).norm(), 1e-15);
  EXPECT_GE(min_eigenvalue(s.cov), -1e-9);
}

TEST(Update, JosephFormMatchesDenseComputation) {
  std::mt19937_64 rng(50);
  SlamState s = state_with({0.2, 0.1, 0.5}, {{1.5, 1.0}, {-0.5, 1.2}}, random_spd(rng, 7, 1e-3));
  const Eigen::Matrix2d Q = Eigen::Vector2d(0.0225, 0.3).asDiagonal();
  RangeBearingObs z = world_to_obs(s.pose(), s.landmark(1));
  z.r += 0.05;
  z.phi += 0.02;

  const auto Hl = measurement_jacobian(s.pose(), s.landmark(1));
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(2, 7);
  H.leftCols(3) = Hl.leftCols<3>();
  H.block(0, 5, 2, 2) = Hl.rightCols<2>();
  const Eigen::MatrixXd S = H * s.cov * H.transpose() + Q;
  const Eigen::MatrixXd K = s.cov * H.transpose() * S.inverse();
  const RangeBearingObs pred = world_to_obs(s.pose(), s.landmark(1));
  const Eigen::Vector2d nu(z.r - pred.r, wrap_angle(z.phi - pred.phi));
  const Eigen::VectorXd mean = s.mean + K * nu;
  const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(7, 7) - K * H;
  const Eigen::MatrixXd cov = A * s.cov * A.transpose() + K * Q * K.transpose();

  ASSERT_TRUE(update(s, z, 1, Q));
  EXPECT_LT((s.mean - mean).norm(), 1e-12);
  EXPECT_LT((s.cov - cov).norm(), 1e-12);
}

TEST(Update, RepeatedObservationsShrinkLandmarkCovariance) {
  SlamState s;
  const Eigen::Matrix2d Q = Eigen::Vector2d(0.0225, 1.0).asDiagonal();
  RangeBearingObs z;
  z.r = 1.2;
  z.phi = 0.7;
  augment(s, z, Q);
  const double initial = s.landmark_cov(0).trace();
  double prev = initial;
  for (int i = 0; i < 20; ++i) {
    ASSERT_TRUE(update(s, z, 0, Q));
    const double now = s.landmark_cov(0).trace();
    EXPECT_LE(now, prev + 1e-15);
    prev = now;
  }
  EXPECT_LT(prev, initial);
}

TEST(Update, BadIndexThrows) {
  SlamState s;
  EXPECT_THROW(update(s, RangeBearingObs{}, 0, Eigen::Matrix2d::Identity()), std::out_of_range);
}

TEST(Augment, ZeroPoseUncertainty) {
  SlamState s;
  const Eigen::Matrix2d Q = Eigen::Vector2d(0.0225, 1.0).asDiagonal();
  RangeBearingObs z;
  z.r = 1.0;
  z.phi = 0.0;
  augment(s, z, Q);
  ASSERT_EQ(s.landmark_count(), 1u);
  EXPECT_NEAR(s.landmark(0).x, 1.0, 1e-15);
  EXPECT_NEAR(s.landmark(0).y, 0.0, 1e-15);
  // J_z = [[cos, -r sin], [sin, r cos]] at heading 0 is the identity here.
  EXPECT_LT((s.landmark_cov(0) - Q).norm(), 1e-15);
  EXPECT_LT(s.cov.topRows(3).norm(), 1e-15);
}

TEST(Augment, KeepsPriorBlocks) {
  std::mt19937_64 rng(51);
  SlamState s = state_with({0.2, 0.1, 0.5}, {{1.5, 1.0}}, random_spd(rng, 5, 1e-3));
  const SlamState before = s;
  RangeBearingObs z;
  z.r = 0.9;
  z.phi = -1.1;
  augment(s, z, Eigen::Vector2d(0.0225, 1.0).asDiagonal());
  EXPECT_EQ(s.landmark_count(), 2u);
  EXPECT_EQ(s.mean.head(5), before.mean);
  EXPECT_LT((s.cov.topLeftCorner(5, 5) - before.cov).norm(), 1e-15);
  EXPECT_GE(min_eigenvalue(s.cov), -1e-9);
}

TEST(Augment, MatchesMonteCarloPropagation) {
  std::mt19937_64 rng(52);
  const Pose2D pose{0.4, -0.3, 0.8};
  Eigen::Matrix3d pose_cov;
  pose_cov << 4e-4, 1e-4, 2e-5, 1e-4, 3e-4, -1e-5, 2e-5, -1e-5, 2e-4;
  const Eigen::Matrix2d Q = Eigen::Vector2d(0.0225 * 0.01, 1.0 * 0.0004).asDiagonal();
  SlamState s = state_with(pose, {}, pose_cov);
  RangeBearingObs z;
  z.r = 1.3;
  z.phi = 0.9;
  augment(s, z, Q);
  const Eigen::Matrix2d analytic = s.landmark_cov(0);

  const Eigen::Matrix3d Lp = pose_cov.llt().matrixL();
  std::normal_distribution<double> g(0.0, 1.0);
  const int n = 100000;
  std::vector<Eigen::Vector2d> samples;
  samples.reserve(n);
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector3d dp = Lp * Eigen::Vector3d(g(rng), g(rng), g(rng));
    RangeBearingObs zs = z;
    zs.r += std::sqrt(Q(0, 0)) * g(rng);
    zs.phi += std::sqrt(Q(1, 1)) * g(rng);
    const WorldPoint w = obs_to_world({pose.x + dp(0), pose.y + dp(1), pose.theta + dp(2)}, zs);
    samples.emplace_back(w.x, w.y);
    mean += samples.back();
  }
  mean /= n;
  Eigen::Matrix2d mc = Eigen::Matrix2d::Zero();
  for (const auto& v : samples) {
    mc += (v - mean) * (v - mean).transpose();
  }
  mc /= (n - 1);
  EXPECT_LT((mc - analytic).norm() / analytic.norm(), 0.10);
  for (int i = 0; i < 2; ++i) {
    EXPECT_NEAR(mc(i, i), analytic(i, i), 0.10 * analytic(i, i));
  }
}

TEST(Step, PredictThenSequentialAssociation) {
  NoiseConfig noise;
  SlamState s;
  RangeBearingObs a;
  a.r = 1.0;
  a.phi = 1.2;
  RangeBearingObs b = a;
  b.r = 1.01;
  const std::vector<RangeBearingObs> obs{a, b};
  const StepReport rep = step(s, {0.01, 0, 0}, obs, noise);
  ASSERT_EQ(rep.outcomes.size(), 2u);
  EXPECT_FALSE(rep.outcomes[0].landmark);
  // The second sees the landmark the first created.
  ASSERT_TRUE(rep.outcomes[1].landmark);
  EXPECT_EQ(*rep.outcomes[1].landmark, 0u);
  EXPECT_TRUE(rep.outcomes[1].applied);
  EXPECT_EQ(s.landmark_count(), 1u);
  EXPECT_NEAR(s.mean(0), 0.01, 1e-3);
}

TEST(Step, NoiselessRunConvergesToTruth) {
  NoiseConfig noise;
  noise.R = Eigen::Matrix3d::Identity() * 1e-12;
  noise.Q = Eigen::Matrix2d::Identity() * 1e-12;
  noise.alpha = 0.6;
  const std::vector<WorldPoint> lms{{1, 1}, {2, -1}, {3, 1.2}, {1.5, 2.5}};
  SlamState s;
  Pose2D truth;
  double max_cov_asym = 0.0;
  double min_eig = 0.0;
  for (int k = 0; k < 300; ++k) {
    const Pose2D u{0.02, 0.0, k % 50 < 25 ? 0.02 : -0.01};
    truth = compose(truth, u);
    std::vector<RangeBearingObs> obs;
    for (const auto& m : lms) {
      if (distance(m, {truth.x, truth.y}) < 3.0) {
        obs.push_back(world_to_obs(truth, m));
      }
    }
    step(s, u, obs, noise);
    max_cov_asym = std::max(max_cov_asym, (s.cov - s.cov.transpose()).cwiseAbs().maxCoeff());
    min_eig = std::min(min_eig, min_eigenvalue(s.cov));
  }
  EXPECT_EQ(s.landmark_count(), lms.size());
  EXPECT_LT(std::hypot(s.mean(0) - truth.x, s.mean(1) - truth.y), 1e-3);
  EXPECT_LT(max_cov_asym, 1e-9);
  EXPECT_GE(min_eig, -1e-9);
}

TEST(NoiseConfig, FromSigmas) {
  const NoiseConfig n = NoiseConfig::from_sigmas(1e-4, 1e-4, 0.02, 0.15, 1.0, 0.6);
  EXPECT_DOUBLE_EQ(n.R(0, 0), 1e-8);
  EXPECT_DOUBLE_EQ(n.R(2, 2), 4e-4);
  EXPECT_DOUBLE_EQ(n.Q(0, 0), 0.0225);
  EXPECT_DOUBLE_EQ(n.Q(1, 1), 1.0);
  EXPECT_DOUBLE_EQ(n.alpha, 0.6);
  EXPECT_NO_THROW(n.validate());
  NoiseConfig bad = n;
  bad.alpha = 0.0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}
