#include "uwbslam/run_io.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json_codec.hpp"

namespace uwbslam {

using codec::Json;
namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write '" + path.string() + "'");
  }
  out << text;
  if (!out) {
    throw std::runtime_error("write failed for '" + path.string() + "'");
  }
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open '" + path.string() + "'");
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

Json header_line(const char* format) { return Json{{"format", format}, {"version", kRunFormatVersion}}; }

void check_header(const Json& j, const std::string& format, const fs::path& path) {
  if (!j.is_object() || j.value("format", std::string{}) != format) {
    throw std::runtime_error("'" + path.string() + "' is not a " + format + " file");
  }
  if (j.value("version", 0) != kRunFormatVersion) {
    throw std::runtime_error("'" + path.string() + "' has unsupported version");
  }
}

Json point_array(const WorldPoint& p) { return Json::array({p.x, p.y}); }

Json obs_points(const Pose2D& pose, const std::vector<RangeBearingObs>& obs) {
  Json arr = Json::array();
  for (const RangeBearingObs& o : obs) {
    arr.push_back(point_array(obs_to_world(pose, o)));
  }
  return arr;
}

Json ellipse_json(const Ellipse& e) {
  return {{"semi_major", e.semi_major}, {"semi_minor", e.semi_minor}, {"angle", e.angle}};
}

std::string g(double v) { return fmt::format("{}", v); }

Pose2D truth_at(const GroundTruth& truth, double t) {
  TrajectoryPair probe;
  probe.estimated.push_back({t, Pose2D{}});
  probe.reference = truth.trajectory;
  const auto corr = timestamp_correspondences(probe);
  if (corr.empty()) {
    throw std::invalid_argument("no ground-truth pose near t=" + g(t));
  }
  return truth.trajectory[corr.front().second].pose;
}

TrajectoryMetrics metrics_for(const TrajectoryPair& pair, const GroundTruth& truth) {
  TrajectoryMetrics m;
  m.alignment = align(pair);
  m.ate_rms = rms_ate(pair, m.alignment);
  const StampedPose& last = pair.estimated.back();
  const Pose2D ref = truth_at(truth, last.t);
  m.final_pose_error = std::hypot(last.pose.x - ref.x, last.pose.y - ref.y);
  return m;
}

Json transform_json(const RigidTransform2D& tf) { return {{"theta", tf.theta}, {"tx", tf.tx}, {"ty", tf.ty}}; }

}  // namespace

Ellipse covariance_ellipse(const Eigen::Matrix2d& cov) {
  const Eigen::Matrix2d sym = 0.5 * (cov + cov.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(sym);
  const Eigen::Vector2d values = es.eigenvalues();  // ascending
  const Eigen::Vector2d major = es.eigenvectors().col(1);
  Ellipse e;
  e.semi_major = std::sqrt(std::max(values(1), 0.0));
  e.semi_minor = std::sqrt(std::max(values(0), 0.0));
  e.angle = std::atan2(major.y(), major.x());
  // Direction is sign-ambiguous; keep it in (-pi/2, pi/2].
  if (e.angle > kPi / 2.0) {
    e.angle -= kPi;
  } else if (e.angle <= -kPi / 2.0) {
    e.angle += kPi;
  }
  return e;
}

void write_run_outputs(const std::string& dir, const Dataset& dataset, const RunConfig& cfg,
                       const RunResult& result) {
  const fs::path root(dir);
  fs::create_directories(root);
  const SlamState& slam = result.final_state;

  std::size_t raw_count = 0;
  std::size_t filtered_count = 0;
  for (const StateRecord& s : result.states) {
    raw_count += s.raw.size();
    filtered_count += s.filtered ? s.filtered->size() : 0;
  }

  Json run = header_line("uwbslam-run");
  run["dataset"] = {{"scenario", dataset.header.scenario}, {"seed", dataset.header.seed}};
  run["config"] = Json::parse(dump_config(cfg));
  run["summary"] = {{"states", result.states.size()},
                    {"ekf_steps", result.steps.size()},
                    {"landmarks", slam.landmark_count()},
                    {"raw_observations", raw_count},
                    {"filtered_observations", filtered_count}};
  run["diagnostics"] = result.diagnostics;
  write_text(root / "run.json", run.dump(2) + "\n");

  std::string poses = header_line("uwbslam-poses").dump() + "\n";
  std::string traj_csv = "state,t,odom_x,odom_y,odom_theta,slam_x,slam_y,slam_theta\n";
  for (const StepSnapshot& s : result.steps) {
    Json cov = Json::array();
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        cov.push_back(s.pose_cov(r, c));
      }
    }
    Json line{{"state", s.state_id},       {"t", s.t},
              {"odom", codec::pose_array(s.odom)}, {"slam", codec::pose_array(s.slam)},
              {"pose_cov", cov},          {"landmarks", s.landmarks},
              {"updates", s.updates},     {"augmented", s.augmented}};
    poses += line.dump() + "\n";
    traj_csv += fmt::format("{},{},{},{},{},{},{},{}\n", s.state_id, g(s.t), g(s.odom.x), g(s.odom.y),
                            g(s.odom.theta), g(s.slam.x), g(s.slam.y), g(s.slam.theta));
  }
  write_text(root / "poses.jsonl", poses);
  write_text(root / "trajectory.csv", traj_csv);

  Json map = header_line("uwbslam-map");
  map["landmarks"] = Json::array();
  std::string lm_csv = "id,x,y,cov_xx,cov_xy,cov_yy,semi_major,semi_minor,angle\n";
  for (std::size_t j = 0; j < slam.landmark_count(); ++j) {
    const WorldPoint p = slam.landmark(j);
    const Eigen::Matrix2d c = slam.landmark_cov(j);
    const Ellipse e = covariance_ellipse(c);
    map["landmarks"].push_back({{"id", j},
                                {"x", p.x},
                                {"y", p.y},
                                {"cov", Json::array({Json::array({c(0, 0), c(0, 1)}), Json::array({c(1, 0), c(1, 1)})})},
                                {"ellipse", ellipse_json(e)}});
    lm_csv += fmt::format("{},{},{},{},{},{},{},{},{}\n", j, g(p.x), g(p.y), g(c(0, 0)), g(c(0, 1)), g(c(1, 1)),
                          g(e.semi_major), g(e.semi_minor), g(e.angle));
  }
  write_text(root / "map.json", map.dump(2) + "\n");
  write_text(root / "landmarks.csv", lm_csv);

  // Raw and filtered points, placed in the world with the state's odometry.
  std::string obs = header_line("uwbslam-observations").dump() + "\n";
  for (const StateRecord& s : result.states) {
    Json line{{"state", s.state_id}, {"t", s.t}, {"odom", codec::pose_array(s.odom)}};
    line["raw"] = obs_points(s.odom, s.raw);
    line["filtered"] = s.filtered ? obs_points(s.odom, *s.filtered) : Json(nullptr);
    obs += line.dump() + "\n";
  }
  write_text(root / "observations.jsonl", obs);

  if (dataset.header.ground_truth) {
    const GroundTruth& gt = *dataset.header.ground_truth;
    std::string gt_csv = "t,x,y,theta\n";
    for (const StampedPose& sp : gt.trajectory) {
      gt_csv += fmt::format("{},{},{},{}\n", g(sp.t), g(sp.pose.x), g(sp.pose.y), g(sp.pose.theta));
    }
    std::string tl_csv = "id,x,y,rcs\n";
    for (std::size_t i = 0; i < gt.landmarks.size(); ++i) {
      const Landmark& l = gt.landmarks[i];
      tl_csv += fmt::format("{},{},{},{}\n", i, g(l.position.x), g(l.position.y), g(l.rcs));
    }
    write_text(root / "ground_truth.csv", gt_csv);
    write_text(root / "truth_landmarks.csv", tl_csv);
  }
}

RunArtifacts read_run_outputs(const std::string& dir) {
  const fs::path root(dir);
  RunArtifacts art;

  const fs::path poses_path = root / "poses.jsonl";
  std::istringstream poses(read_text(poses_path));
  std::string line;
  std::size_t line_no = 0;
  try {
    while (std::getline(poses, line)) {
      ++line_no;
      if (line.empty()) {
        continue;
      }
      const Json j = Json::parse(line);
      if (line_no == 1) {
        check_header(j, "uwbslam-poses", poses_path);
        continue;
      }
      PoseLogEntry e;
      e.state_id = j.at("state").get<std::int64_t>();
      e.t = j.at("t").get<double>();
      e.odom = codec::pose_from_array(j.at("odom"));
      e.slam = codec::pose_from_array(j.at("slam"));
      art.poses.push_back(e);
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(poses_path.string() + ": line " + std::to_string(line_no) + ": " + e.what());
  }

  const fs::path map_path = root / "map.json";
  try {
    const Json map = Json::parse(read_text(map_path));
    check_header(map, "uwbslam-map", map_path);
    for (const Json& l : map.at("landmarks")) {
      MapLandmark m;
      m.id = l.at("id").get<std::size_t>();
      m.position = {l.at("x").get<double>(), l.at("y").get<double>()};
      const Json& c = l.at("cov");
      for (int r = 0; r < 2; ++r) {
        for (int k = 0; k < 2; ++k) {
          m.cov(r, k) = c.at(r).at(k).get<double>();
        }
      }
      art.landmarks.push_back(m);
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(map_path.string() + ": " + e.what());
  }

  const fs::path gt_path = root / "ground_truth.csv";
  const fs::path tl_path = root / "truth_landmarks.csv";
  if (fs::exists(gt_path) && fs::exists(tl_path)) {
    GroundTruth gt;
    std::istringstream gin(read_text(gt_path));
    std::getline(gin, line);
    while (std::getline(gin, line)) {
      StampedPose sp;
      if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &sp.t, &sp.pose.x, &sp.pose.y, &sp.pose.theta) != 4) {
        throw std::runtime_error(gt_path.string() + ": malformed row '" + line + "'");
      }
      gt.trajectory.push_back(sp);
    }
    std::istringstream tin(read_text(tl_path));
    std::getline(tin, line);
    while (std::getline(tin, line)) {
      std::size_t id = 0;
      Landmark l;
      if (std::sscanf(line.c_str(), "%zu,%lf,%lf,%lf", &id, &l.position.x, &l.position.y, &l.rcs) != 4) {
        throw std::runtime_error(tl_path.string() + ": malformed row '" + line + "'");
      }
      gt.landmarks.push_back(l);
    }
    art.ground_truth = std::move(gt);
  }
  return art;
}

RunArtifacts artifacts_from_result(const RunResult& result, const std::optional<GroundTruth>& truth) {
  RunArtifacts art;
  for (const StepSnapshot& s : result.steps) {
    art.poses.push_back({s.state_id, s.t, s.odom, s.slam});
  }
  for (std::size_t j = 0; j < result.final_state.landmark_count(); ++j) {
    art.landmarks.push_back({j, result.final_state.landmark(j), result.final_state.landmark_cov(j)});
  }
  art.ground_truth = truth;
  return art;
}

EvalReport evaluate(const RunArtifacts& run, const GroundTruth& truth) {
  if (truth.trajectory.empty()) {
    throw std::invalid_argument("evaluation needs a ground-truth trajectory");
  }
  TrajectoryPair slam;
  TrajectoryPair odom;
  slam.reference = truth.trajectory;
  odom.reference = truth.trajectory;
  for (const PoseLogEntry& p : run.poses) {
    slam.estimated.push_back({p.t, p.slam});
    odom.estimated.push_back({p.t, p.odom});
  }
  if (run.poses.size() < 2) {
    throw std::invalid_argument("evaluation needs at least two logged poses, found " +
                                std::to_string(run.poses.size()));
  }
  EvalReport report;
  report.poses = run.poses.size();
  report.slam = metrics_for(slam, truth);
  report.odometry = metrics_for(odom, truth);

  std::vector<WorldPoint> est;
  for (const MapLandmark& l : run.landmarks) {
    est.push_back(l.position);
  }
  std::vector<WorldPoint> tru;
  for (const Landmark& l : truth.landmarks) {
    tru.push_back(l.position);
  }
  report.map = map_error(est, tru, report.slam.alignment);
  report.truth_landmarks = tru.size();
  report.estimated_landmarks = est.size();
  return report;
}

std::string report_to_json(const EvalReport& report) {
  Json j{{"format", "uwbslam-report"}, {"version", kReportFormatVersion}, {"poses", report.poses}};
  auto metrics = [](const TrajectoryMetrics& m) {
    return Json{{"ate_rms", m.ate_rms}, {"final_pose_error", m.final_pose_error}, {"alignment", transform_json(m.alignment)}};
  };
  j["slam"] = metrics(report.slam);
  j["odometry"] = metrics(report.odometry);
  Json matches = Json::array();
  for (const LandmarkMatch& m : report.map.matches) {
    matches.push_back({{"estimated", m.estimated}, {"truth", m.truth}, {"error", m.error}});
  }
  j["map"] = {{"gate", kMapMatchGate},
              {"estimated_landmarks", report.estimated_landmarks},
              {"truth_landmarks", report.truth_landmarks},
              {"matched", report.map.matches.size()},
              {"mean_error", report.map.mean_error},
              {"unmatched_estimated", report.map.unmatched_estimated.size()},
              {"unmatched_truth", report.map.unmatched_truth.size()},
              {"matches", matches}};
  return j.dump(2) + "\n";
}

std::string trajectories_csv(const RunArtifacts& run, const GroundTruth& truth, const EvalReport& report) {
  std::string out = "state,t,gt_x,gt_y,odom_x,odom_y,slam_x,slam_y\n";
  for (const PoseLogEntry& p : run.poses) {
    const Pose2D ref = truth_at(truth, p.t);
    const WorldPoint o = report.odometry.alignment.apply(WorldPoint{p.odom.x, p.odom.y});
    const WorldPoint s = report.slam.alignment.apply(WorldPoint{p.slam.x, p.slam.y});
    out += fmt::format("{},{},{},{},{},{},{},{}\n", p.state_id, g(p.t), g(ref.x), g(ref.y), g(o.x), g(o.y), g(s.x),
                       g(s.y));
  }
  return out;
}

std::string render_svg(const RunArtifacts& run) {
  double xmin = std::numeric_limits<double>::infinity();
  double ymin = xmin;
  double xmax = -xmin;
  double ymax = -xmin;
  auto grow = [&](double x, double y) {
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
    ymin = std::min(ymin, y);
    ymax = std::max(ymax, y);
  };
  for (const PoseLogEntry& p : run.poses) {
    grow(p.odom.x, p.odom.y);
    grow(p.slam.x, p.slam.y);
  }
  for (const MapLandmark& l : run.landmarks) {
    grow(l.position.x, l.position.y);
  }
  if (run.ground_truth) {
    for (const StampedPose& sp : run.ground_truth->trajectory) {
      grow(sp.pose.x, sp.pose.y);
    }
    for (const Landmark& l : run.ground_truth->landmarks) {
      grow(l.position.x, l.position.y);
    }
  }
  if (!std::isfinite(xmin)) {
    xmin = ymin = -1.0;
    xmax = ymax = 1.0;
  }
  const double margin = 0.5;
  xmin -= margin;
  ymin -= margin;
  xmax += margin;
  ymax += margin;
  const double size = 800.0;
  const double scale = size / std::max(xmax - xmin, ymax - ymin);
  const double width = (xmax - xmin) * scale;
  const double height = (ymax - ymin) * scale;
  auto px = [&](double x) { return (x - xmin) * scale; };
  auto py = [&](double y) { return (ymax - y) * scale; };
  auto fmt2 = [](double v) { return fmt::format("{:.2f}", v); };

  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n",
      fmt2(width), fmt2(height), fmt2(width), fmt2(height));
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  auto polyline = [&](const std::vector<WorldPoint>& pts, const char* colour, const char* extra) {
    if (pts.empty()) {
      return;
    }
    svg += "<polyline fill=\"none\" stroke=\"";
    svg += colour;
    svg += "\" stroke-width=\"1.5\"";
    svg += extra;
    svg += " points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      svg += (i ? " " : "") + fmt2(px(pts[i].x)) + "," + fmt2(py(pts[i].y));
    }
    svg += "\"/>\n";
  };

  if (run.ground_truth) {
    std::vector<WorldPoint> gt;
    for (const StampedPose& sp : run.ground_truth->trajectory) {
      gt.push_back({sp.pose.x, sp.pose.y});
    }
    polyline(gt, "black", "");
    for (const Landmark& l : run.ground_truth->landmarks) {
      const double x = px(l.position.x);
      const double y = py(l.position.y);
      svg += fmt::format("<path d=\"M{} {}L{} {}M{} {}L{} {}\" stroke=\"black\" stroke-width=\"1.5\"/>\n",
                         fmt2(x - 5), fmt2(y - 5), fmt2(x + 5), fmt2(y + 5), fmt2(x - 5), fmt2(y + 5), fmt2(x + 5),
                         fmt2(y - 5));
    }
  }
  std::vector<WorldPoint> odom;
  std::vector<WorldPoint> slam;
  for (const PoseLogEntry& p : run.poses) {
    odom.push_back({p.odom.x, p.odom.y});
    slam.push_back({p.slam.x, p.slam.y});
  }
  polyline(odom, "#d62728", " stroke-dasharray=\"6,4\"");
  polyline(slam, "#1f77b4", "");

  for (const MapLandmark& l : run.landmarks) {
    const Ellipse e = covariance_ellipse(l.cov);
    const double x = px(l.position.x);
    const double y = py(l.position.y);
    // y is flipped on screen, so the rotation sense flips too.
    svg += fmt::format(
        "<ellipse cx=\"{}\" cy=\"{}\" rx=\"{}\" ry=\"{}\" transform=\"rotate({} {} {})\" fill=\"#1f77b4\" "
        "fill-opacity=\"0.2\" stroke=\"#1f77b4\"/>\n",
        fmt2(x), fmt2(y), fmt2(std::max(2.0 * e.semi_major * scale, 1.0)),
        fmt2(std::max(2.0 * e.semi_minor * scale, 1.0)), fmt2(-e.angle * 180.0 / kPi), fmt2(x), fmt2(y));
    svg += fmt::format("<circle cx=\"{}\" cy=\"{}\" r=\"2.5\" fill=\"#1f77b4\"/>\n", fmt2(x), fmt2(y));
  }

  svg += "<g font-family=\"sans-serif\" font-size=\"13\">\n";
  svg += "<text x=\"10\" y=\"18\" fill=\"black\">ground truth</text>\n";
  svg += "<text x=\"10\" y=\"34\" fill=\"#d62728\">odometry</text>\n";
  svg += "<text x=\"10\" y=\"50\" fill=\"#1f77b4\">SLAM (landmarks at 2 sigma)</text>\n";
  svg += "</g>\n</svg>\n";
  return svg;
}

}  // namespace uwbslam
