#include "uwbslam/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "json_codec.hpp"

namespace uwbslam {

namespace {

// Per-tick body-frame motion increments of a script. Entry k is the motion
// between tick k and k+1.
std::vector<Pose2D> script_increments(const TrajectoryScript& script) {
  std::vector<Pose2D> increments;
  const double dt = 1.0 / script.radar_rate;
  std::size_t seg = 0;
  double done = 0.0;  // progress through the current segment
  while (seg < script.segments.size()) {
    Pose2D tick_motion;
    double budget = dt;
    while (budget > 0.0 && seg < script.segments.size()) {
      const Segment& s = script.segments[seg];
      const double total = std::abs(s.amount);
      const double remaining = total - done;
      const double needed = remaining / s.speed;
      const double amount = needed <= budget ? remaining : s.speed * budget;
      Pose2D piece;
      if (s.kind == Segment::Kind::Straight) {
        piece.x = amount;
      } else {
        piece.theta = std::copysign(amount, s.amount);
      }
      tick_motion = compose(tick_motion, piece);
      if (needed <= budget) {
        budget -= needed;
        ++seg;
        done = 0.0;
      } else {
        done += amount;
        budget = 0.0;
      }
    }
    increments.push_back(tick_motion);
  }
  return increments;
}

void add_pulse(std::vector<double>& signal, double center_bin, double amplitude, double width) {
  const auto lo = static_cast<long>(std::floor(center_bin - 5.0 * width));
  const auto hi = static_cast<long>(std::ceil(center_bin + 5.0 * width));
  const long last = static_cast<long>(signal.size()) - 1;
  for (long i = std::max(0L, lo); i <= std::min(last, hi); ++i) {
    const double u = (static_cast<double>(i) - center_bin) / width;
    signal[static_cast<std::size_t>(i)] += amplitude * std::exp(-0.5 * u * u);
  }
}

Segment::Kind kind_from_name(const std::string& name) {
  if (name == "straight") {
    return Segment::Kind::Straight;
  }
  if (name == "turn") {
    return Segment::Kind::Turn;
  }
  throw std::invalid_argument("segment kind must be 'straight' or 'turn', got '" + name + "'");
}

}  // namespace

std::vector<StampedPose> integrate_script(const TrajectoryScript& script) {
  const double dt = 1.0 / script.radar_rate;
  std::vector<StampedPose> poses{{0.0, Pose2D{}}};
  Pose2D pose;
  std::size_t k = 0;
  for (const Pose2D& u : script_increments(script)) {
    pose = compose(pose, u);
    ++k;
    poses.push_back({static_cast<double>(k) * dt, pose});
  }
  return poses;
}

double antenna_gain(double off_boresight, double theta_fov) {
  const double half = 0.5 * theta_fov;
  if (std::abs(off_boresight) >= half) {
    return 0.0;
  }
  return std::cos(0.5 * kPi * off_boresight / half);
}

std::vector<double> echo_profile(const Pose2D& sensor_pose, double theta_fov,
                                 const std::vector<Landmark>& landmarks, const EchoModel& echo) {
  std::vector<double> signal(echo.bins, 0.0);
  const double max_range = echo.bin0_range + static_cast<double>(echo.bins - 1) * echo.bin_spacing;
  for (const Landmark& lm : landmarks) {
    const double dx = lm.position.x - sensor_pose.x;
    const double dy = lm.position.y - sensor_pose.y;
    const double r = std::hypot(dx, dy);
    if (r < echo.bin0_range || r > max_range) {
      continue;
    }
    const double off = wrap_angle(std::atan2(dy, dx) - sensor_pose.theta);
    const double g = antenna_gain(off, theta_fov);
    if (g <= 0.0) {
      continue;
    }
    const double amplitude = lm.rcs * g / std::pow(std::max(r, 0.2), echo.range_exponent);
    add_pulse(signal, (r - echo.bin0_range) / echo.bin_spacing, amplitude, echo.pulse_width_bins);
  }
  return signal;
}

void validate_scenario(const Scenario& sc) {
  sc.rig.validate();
  sc.signal.validate();
  if (!(sc.script.radar_rate > 0.0)) {
    throw std::invalid_argument("radar_rate must be > 0");
  }
  for (const Segment& s : sc.script.segments) {
    if (!(s.speed > 0.0)) {
      throw std::invalid_argument("segment speed must be > 0");
    }
    if (s.kind == Segment::Kind::Straight && !(s.amount > 0.0)) {
      throw std::invalid_argument("straight segment length must be > 0");
    }
    if (s.kind == Segment::Kind::Turn && s.amount == 0.0) {
      throw std::invalid_argument("turn segment angle must be non-zero");
    }
  }
  for (const Landmark& lm : sc.world.landmarks) {
    if (!(lm.rcs > 0.0) || !std::isfinite(lm.position.x) || !std::isfinite(lm.position.y)) {
      throw std::invalid_argument("landmarks need finite positions and rcs > 0");
    }
  }
  if (!(sc.world.clutter_rate >= 0.0)) {
    throw std::invalid_argument("clutter_rate must be >= 0");
  }
  if (!(sc.world.clutter_amp_min >= 0.0 && sc.world.clutter_amp_max >= sc.world.clutter_amp_min)) {
    throw std::invalid_argument("clutter amplitudes must satisfy 0 <= min <= max");
  }
  if (!(sc.odom_noise.sigma_translation >= 0.0 && sc.odom_noise.sigma_rotation >= 0.0)) {
    throw std::invalid_argument("odometry noise sigmas must be >= 0");
  }
  if (sc.echo.bins < 2 || !(sc.echo.bin_spacing > 0.0) || !(sc.echo.pulse_width_bins > 0.0) ||
      !(sc.echo.noise_sigma >= 0.0)) {
    throw std::invalid_argument("echo model needs >= 2 bins, spacing > 0, width > 0, noise >= 0");
  }
}

Dataset simulate(const Scenario& sc) {
  validate_scenario(sc);

  Dataset ds;
  ds.header.scenario = sc.name;
  ds.header.seed = sc.world.seed;
  ds.header.rig = sc.rig;
  ds.header.signal = sc.signal;
  ds.header.sensors = sc.rig.sensor_ids();

  std::mt19937_64 rng(sc.world.seed);
  std::normal_distribution<double> unit_normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit_uniform(0.0, 1.0);
  const double dt = 1.0 / sc.script.radar_rate;
  const double last_range =
      sc.echo.bin0_range + static_cast<double>(sc.echo.bins - 1) * sc.echo.bin_spacing;

  GroundTruth truth;
  truth.landmarks = sc.world.landmarks;

  const auto emit_frames = [&](double t, const Pose2D& pose) {
    for (const SensorPairGeometry& pair : sc.rig.pairs) {
      const auto mounts = pair.sensor_mounts();
      for (std::size_t k = 0; k < 2; ++k) {
        std::vector<double> signal =
            echo_profile(compose(pose, mounts[k]), pair.theta_fov, sc.world.landmarks, sc.echo);
        if (sc.world.clutter_rate > 0.0) {
          std::poisson_distribution<int> clutter(sc.world.clutter_rate);
          const int count = clutter(rng);
          for (int c = 0; c < count; ++c) {
            const double range = sc.echo.bin0_range + unit_uniform(rng) * (last_range - sc.echo.bin0_range);
            const double amp = sc.world.clutter_amp_min +
                               unit_uniform(rng) * (sc.world.clutter_amp_max - sc.world.clutter_amp_min);
            add_pulse(signal, (range - sc.echo.bin0_range) / sc.echo.bin_spacing, amp,
                      sc.echo.pulse_width_bins);
          }
        }
        FrameRecord frame;
        frame.t = t;
        frame.sensor_id = pair.sensor_ids[k];
        frame.bin0_range = sc.echo.bin0_range;
        frame.bin_spacing = sc.echo.bin_spacing;
        frame.amplitudes.resize(signal.size());
        for (std::size_t i = 0; i < signal.size(); ++i) {
          double a = signal[i];
          if (sc.echo.noise_sigma > 0.0) {
            a = std::abs(a + sc.echo.noise_sigma * unit_normal(rng));
          }
          frame.amplitudes[i] = static_cast<float>(std::min(a, 1.0));
        }
        ds.records.emplace_back(std::move(frame));
      }
    }
  };

  Pose2D gt;
  Pose2D odom;
  truth.trajectory.push_back({0.0, gt});
  ds.records.emplace_back(OdomSample{0.0, odom});
  emit_frames(0.0, gt);

  std::size_t k = 0;
  for (const Pose2D& u : script_increments(sc.script)) {
    ++k;
    const double t = static_cast<double>(k) * dt;
    gt = compose(gt, u);
    Pose2D noisy = u;
    if (u.x != 0.0 || u.y != 0.0 || u.theta != 0.0) {
      const double travelled = std::hypot(u.x, u.y);
      noisy.x += sc.odom_noise.sigma_translation * unit_normal(rng);
      noisy.y += sc.odom_noise.sigma_translation * unit_normal(rng);
      noisy.theta += sc.odom_noise.sigma_rotation * unit_normal(rng) + sc.odom_noise.drift_bias * travelled;
    }
    odom = compose(odom, noisy);
    truth.trajectory.push_back({t, gt});
    ds.records.emplace_back(OdomSample{t, odom});
    emit_frames(t, gt);
  }
  ds.header.ground_truth = std::move(truth);
  return ds;
}

Scenario square_loop_scenario() {
  Scenario sc;
  sc.name = "square_loop";
  sc.world.seed = 7;
  // Two landmarks per side: one inside the loop (left of travel), one outside.
  const std::vector<WorldPoint> spots{{1.3, 0.8}, {2.7, -0.8}, {3.2, 1.3}, {4.8, 2.7},
                                      {2.7, 3.2}, {1.3, 4.8}, {0.8, 2.7}, {-0.8, 1.3}};
  for (const WorldPoint& p : spots) {
    sc.world.landmarks.push_back({p, 0.01});
  }
  for (int lap = 0; lap < 2; ++lap) {
    for (int side = 0; side < 4; ++side) {
      sc.script.segments.push_back({Segment::Kind::Straight, 4.0, 0.05});
      if (!(lap == 1 && side == 3)) {
        sc.script.segments.push_back({Segment::Kind::Turn, kPi / 2.0, 0.2});
      }
    }
  }
  sc.odom_noise.sigma_translation = 5e-4;
  sc.odom_noise.sigma_rotation = 1e-3;
  sc.odom_noise.drift_bias = 0.005;
  return sc;
}

Scenario single_landmark_scenario() {
  Scenario sc;
  sc.name = "single_landmark";
  sc.world.seed = 1;
  sc.world.landmarks.push_back({{1.0, 1.0}, 0.01});
  sc.script.segments.push_back({Segment::Kind::Straight, 2.0, 0.05});
  return sc;
}

Scenario load_scenario(const std::string& name_or_path) {
  if (name_or_path == "square_loop") {
    return square_loop_scenario();
  }
  if (name_or_path == "single_landmark") {
    return single_landmark_scenario();
  }
  std::ifstream in(name_or_path);
  if (!in) {
    throw std::invalid_argument("unknown scenario '" + name_or_path +
                                "' (expected square_loop, single_landmark or a JSON file)");
  }
  codec::Json j;
  try {
    j = codec::Json::parse(in);
  } catch (const std::exception& e) {
    throw std::invalid_argument("scenario file '" + name_or_path + "': " + e.what());
  }
  Scenario sc;
  const std::string base = j.value("base", std::string{});
  if (base == "square_loop") {
    sc = square_loop_scenario();
  } else if (base == "single_landmark") {
    sc = single_landmark_scenario();
  } else if (!base.empty()) {
    throw std::invalid_argument("scenario base must be square_loop or single_landmark");
  }
  sc.name = j.value("name", base.empty() ? std::string("custom") : base);
  if (j.contains("landmarks")) {
    sc.world.landmarks.clear();
    for (const auto& lm : j.at("landmarks")) {
      sc.world.landmarks.push_back(
          {{lm.at(0).get<double>(), lm.at(1).get<double>()}, lm.size() > 2 ? lm.at(2).get<double>() : 0.01});
    }
  }
  sc.world.clutter_rate = j.value("clutter_rate", sc.world.clutter_rate);
  sc.world.clutter_amp_min = j.value("clutter_amp_min", sc.world.clutter_amp_min);
  sc.world.clutter_amp_max = j.value("clutter_amp_max", sc.world.clutter_amp_max);
  sc.world.seed = j.value("seed", sc.world.seed);
  if (j.contains("segments")) {
    sc.script.segments.clear();
    for (const auto& s : j.at("segments")) {
      sc.script.segments.push_back({kind_from_name(s.at("kind").get<std::string>()),
                                    s.at("amount").get<double>(), s.at("speed").get<double>()});
    }
  }
  sc.script.radar_rate = j.value("radar_rate", sc.script.radar_rate);
  if (j.contains("odom_noise")) {
    const auto& n = j.at("odom_noise");
    sc.odom_noise.sigma_translation = n.value("sigma_translation", sc.odom_noise.sigma_translation);
    sc.odom_noise.sigma_rotation = n.value("sigma_rotation", sc.odom_noise.sigma_rotation);
    sc.odom_noise.drift_bias = n.value("drift_bias", sc.odom_noise.drift_bias);
  }
  if (j.contains("echo")) {
    const auto& e = j.at("echo");
    sc.echo.bins = e.value("bins", sc.echo.bins);
    sc.echo.bin0_range = e.value("bin0_range", sc.echo.bin0_range);
    sc.echo.bin_spacing = e.value("bin_spacing", sc.echo.bin_spacing);
    sc.echo.pulse_width_bins = e.value("pulse_width_bins", sc.echo.pulse_width_bins);
    sc.echo.range_exponent = e.value("range_exponent", sc.echo.range_exponent);
    sc.echo.noise_sigma = e.value("noise_sigma", sc.echo.noise_sigma);
  }
  if (j.contains("rig")) {
    sc.rig = codec::rig_from_json(j.at("rig"));
  }
  if (j.contains("signal")) {
    sc.signal = codec::signal_from_json(j.at("signal"), sc.signal);
  }
  return sc;
}

std::vector<std::size_t> landmarks_in_fov(const std::vector<StampedPose>& trajectory,
                                          const RigConfig& rig, const std::vector<Landmark>& landmarks,
                                          double max_range) {
  std::vector<std::size_t> seen;
  for (std::size_t i = 0; i < landmarks.size(); ++i) {
    bool visible = false;
    for (const StampedPose& sp : trajectory) {
      for (const SensorPairGeometry& pair : rig.pairs) {
        for (const Pose2D& mount : pair.sensor_mounts()) {
          const Pose2D sensor = compose(sp.pose, mount);
          const double dx = landmarks[i].position.x - sensor.x;
          const double dy = landmarks[i].position.y - sensor.y;
          const double r = std::hypot(dx, dy);
          const double off = wrap_angle(std::atan2(dy, dx) - sensor.theta);
          if (r <= max_range && std::abs(off) < 0.5 * pair.theta_fov) {
            visible = true;
            break;
          }
        }
        if (visible) {
          break;
        }
      }
      if (visible) {
        break;
      }
    }
    if (visible) {
      seen.push_back(i);
    }
  }
  return seen;
}

}  // namespace uwbslam
