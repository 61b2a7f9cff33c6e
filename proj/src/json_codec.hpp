#pragma once

// JSON encoding of the value types shared by the dataset, config and run
// formats. Internal to the library.

#include <json.hpp>

#include "uwbslam/dataset.hpp"
#include "uwbslam/ekf_slam.hpp"
#include "uwbslam/outlier_filter.hpp"
#include "uwbslam/radar_frontend.hpp"
#include "uwbslam/trilateration.hpp"

namespace uwbslam::codec {

using Json = nlohmann::ordered_json;

Json to_json(const SensorPairGeometry& g);
SensorPairGeometry pair_from_json(const Json& j);

Json to_json(const RigConfig& rig);
RigConfig rig_from_json(const Json& j);

Json to_json(const SignalConfig& cfg);
SignalConfig signal_from_json(const Json& j, SignalConfig base = {});

Json to_json(const FilterConfig& cfg);
FilterConfig filter_from_json(const Json& j, FilterConfig base = {});

Json pose_array(const Pose2D& p);
Pose2D pose_from_array(const Json& j);

std::string side_name(PairSide side);
PairSide side_from_name(const std::string& name);

}  // namespace uwbslam::codec
