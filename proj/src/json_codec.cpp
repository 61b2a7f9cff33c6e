#include "json_codec.hpp"

#include <stdexcept>

namespace uwbslam::codec {

std::string side_name(PairSide side) { return side == PairSide::Left ? "left" : "right"; }

PairSide side_from_name(const std::string& name) {
  if (name == "left") {
    return PairSide::Left;
  }
  if (name == "right") {
    return PairSide::Right;
  }
  throw std::invalid_argument("unknown pair side '" + name + "'");
}

Json to_json(const SensorPairGeometry& g) {
  Json j;
  j["side"] = side_name(g.side);
  j["sensor_ids"] = {g.sensor_ids[0], g.sensor_ids[1]};
  j["d"] = g.d;
  j["s"] = g.s;
  j["theta_fov"] = g.theta_fov;
  j["mount_yaw"] = g.mount_yaw;
  return j;
}

SensorPairGeometry pair_from_json(const Json& j) {
  SensorPairGeometry g = side_from_name(j.at("side").get<std::string>()) == PairSide::Left
                             ? SensorPairGeometry::left()
                             : SensorPairGeometry::right();
  const auto& ids = j.at("sensor_ids");
  if (!ids.is_array() || ids.size() != 2) {
    throw std::invalid_argument("sensor_ids must be an array of two names");
  }
  g.sensor_ids = {ids[0].get<std::string>(), ids[1].get<std::string>()};
  g.d = j.at("d").get<double>();
  g.s = j.at("s").get<double>();
  g.theta_fov = j.at("theta_fov").get<double>();
  g.mount_yaw = j.at("mount_yaw").get<double>();
  return g;
}

Json to_json(const RigConfig& rig) {
  Json pairs = Json::array();
  for (const auto& p : rig.pairs) {
    pairs.push_back(to_json(p));
  }
  Json j;
  j["pairs"] = std::move(pairs);
  return j;
}

RigConfig rig_from_json(const Json& j) {
  RigConfig rig;
  rig.pairs.clear();
  for (const auto& p : j.at("pairs")) {
    rig.pairs.push_back(pair_from_json(p));
  }
  return rig;
}

Json to_json(const SignalConfig& cfg) {
  Json j;
  j["f_len"] = cfg.f_len;
  j["n"] = cfg.n;
  j["min_ph"] = cfg.min_ph;
  j["min_pp"] = cfg.min_pp;
  j["max_range_L"] = cfg.max_range_L;
  return j;
}

SignalConfig signal_from_json(const Json& j, SignalConfig base) {
  base.f_len = j.value("f_len", base.f_len);
  base.n = j.value("n", base.n);
  base.min_ph = j.value("min_ph", base.min_ph);
  base.min_pp = j.value("min_pp", base.min_pp);
  base.max_range_L = j.value("max_range_L", base.max_range_L);
  return base;
}

Json to_json(const FilterConfig& cfg) {
  Json j;
  j["window_size"] = cfg.window_size;
  j["min_opc"] = cfg.min_opc;
  j["search_rad"] = cfg.search_rad;
  j["min_disp_translation"] = cfg.min_disp_translation;
  j["min_disp_rotation"] = cfg.min_disp_rotation;
  return j;
}

FilterConfig filter_from_json(const Json& j, FilterConfig base) {
  base.window_size = j.value("window_size", base.window_size);
  base.min_opc = j.value("min_opc", base.min_opc);
  base.search_rad = j.value("search_rad", base.search_rad);
  base.min_disp_translation = j.value("min_disp_translation", base.min_disp_translation);
  base.min_disp_rotation = j.value("min_disp_rotation", base.min_disp_rotation);
  return base;
}

Json pose_array(const Pose2D& p) { return Json::array({p.x, p.y, p.theta}); }

Pose2D pose_from_array(const Json& j) {
  if (!j.is_array() || j.size() != 3) {
    throw std::invalid_argument("pose must be an array [x, y, theta]");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace uwbslam::codec
