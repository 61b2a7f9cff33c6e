#include "uwbslam/dataset.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "json_codec.hpp"
#include "uwbslam/base64.hpp"

namespace uwbslam {

using codec::Json;

namespace {

constexpr const char* kDatasetFormat = "uwbslam-dataset";

Json header_to_json(const DatasetHeader& h) {
  Json j;
  j["format"] = kDatasetFormat;
  j["version"] = h.version;
  j["scenario"] = h.scenario;
  j["seed"] = h.seed;
  j["rig"] = codec::to_json(h.rig);
  j["signal"] = codec::to_json(h.signal);
  j["sensors"] = h.sensors;
  if (h.ground_truth) {
    Json lms = Json::array();
    for (const auto& lm : h.ground_truth->landmarks) {
      lms.push_back(Json::array({lm.position.x, lm.position.y, lm.rcs}));
    }
    Json traj = Json::array();
    for (const auto& sp : h.ground_truth->trajectory) {
      traj.push_back(Json::array({sp.t, sp.pose.x, sp.pose.y, sp.pose.theta}));
    }
    j["ground_truth"] = {{"landmarks", std::move(lms)}, {"trajectory", std::move(traj)}};
  } else {
    j["ground_truth"] = nullptr;
  }
  return j;
}

DatasetHeader header_from_json(const Json& j) {
  if (j.value("format", std::string{}) != kDatasetFormat) {
    throw std::invalid_argument("header: format must be \"uwbslam-dataset\"");
  }
  DatasetHeader h;
  h.version = j.at("version").get<int>();
  if (h.version != kDatasetFormatVersion) {
    throw std::invalid_argument("header: unsupported version " + std::to_string(h.version));
  }
  h.scenario = j.at("scenario").get<std::string>();
  h.seed = j.at("seed").get<std::uint64_t>();
  h.rig = codec::rig_from_json(j.at("rig"));
  h.signal = codec::signal_from_json(j.at("signal"));
  h.sensors = j.at("sensors").get<std::vector<std::string>>();
  const Json& gt = j.at("ground_truth");
  if (!gt.is_null()) {
    GroundTruth truth;
    for (const auto& lm : gt.at("landmarks")) {
      truth.landmarks.push_back({{lm.at(0).get<double>(), lm.at(1).get<double>()}, lm.at(2).get<double>()});
    }
    for (const auto& sp : gt.at("trajectory")) {
      truth.trajectory.push_back(
          {sp.at(0).get<double>(),
           {sp.at(1).get<double>(), sp.at(2).get<double>(), sp.at(3).get<double>()}});
    }
    h.ground_truth = std::move(truth);
  }
  return h;
}

}  // namespace

std::vector<std::string> RigConfig::sensor_ids() const {
  std::vector<std::string> ids;
  for (const auto& p : pairs) {
    ids.push_back(p.sensor_ids[0]);
    ids.push_back(p.sensor_ids[1]);
  }
  return ids;
}

void RigConfig::validate() const {
  if (pairs.empty()) {
    throw std::invalid_argument("rig must declare at least one sensor pair");
  }
  std::set<std::string> seen;
  for (const auto& p : pairs) {
    p.validate();
    for (const auto& id : p.sensor_ids) {
      if (!seen.insert(id).second) {
        throw std::invalid_argument("sensor id '" + id + "' used by more than one pair slot");
      }
    }
  }
}

RadarFrame FrameRecord::to_frame() const {
  RadarFrame frame;
  frame.sensor_id = sensor_id;
  frame.amplitudes.assign(amplitudes.begin(), amplitudes.end());
  frame.bin0_range = bin0_range;
  frame.bin_spacing = bin_spacing;
  frame.timestamp = t;
  return frame;
}

double record_time(const Record& record) {
  return std::visit([](const auto& r) { return r.t; }, record);
}

DatasetError::DatasetError(std::size_t line, const std::string& what)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

void write_dataset(std::ostream& out, const Dataset& dataset) {
  out << header_to_json(dataset.header).dump() << '\n';
  for (const Record& record : dataset.records) {
    Json j;
    if (const auto* odom = std::get_if<OdomSample>(&record)) {
      j["type"] = "odom";
      j["t"] = odom->t;
      j["x"] = odom->pose.x;
      j["y"] = odom->pose.y;
      j["theta"] = odom->pose.theta;
    } else {
      const auto& frame = std::get<FrameRecord>(record);
      j["type"] = "frame";
      j["t"] = frame.t;
      j["sensor"] = frame.sensor_id;
      j["bin0"] = frame.bin0_range;
      j["spacing"] = frame.bin_spacing;
      j["bins"] = frame.amplitudes.size();
      j["amplitudes"] = base64::encode_f32le(frame.amplitudes);
    }
    out << j.dump() << '\n';
  }
}

Dataset read_dataset(std::istream& in) {
  Dataset dataset;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) {
    throw DatasetError(1, "empty dataset (missing header)");
  }
  ++line_no;
  try {
    dataset.header = header_from_json(Json::parse(line));
    dataset.header.rig.validate();
  } catch (const std::exception& e) {
    throw DatasetError(line_no, std::string("bad header: ") + e.what());
  }
  const std::set<std::string> sensors(dataset.header.sensors.begin(), dataset.header.sensors.end());
  double last_t = -std::numeric_limits<double>::infinity();

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    Record record;
    try {
      const Json j = Json::parse(line);
      const std::string type = j.at("type").get<std::string>();
      if (type == "odom") {
        OdomSample odom;
        odom.t = j.at("t").get<double>();
        odom.pose = {j.at("x").get<double>(), j.at("y").get<double>(), j.at("theta").get<double>()};
        record = odom;
      } else if (type == "frame") {
        FrameRecord frame;
        frame.t = j.at("t").get<double>();
        frame.sensor_id = j.at("sensor").get<std::string>();
        frame.bin0_range = j.at("bin0").get<double>();
        frame.bin_spacing = j.at("spacing").get<double>();
        frame.amplitudes = base64::decode_f32le(j.at("amplitudes").get<std::string>());
        if (frame.amplitudes.size() != j.at("bins").get<std::size_t>()) {
          throw std::invalid_argument("amplitude payload does not match 'bins'");
        }
        if (!sensors.contains(frame.sensor_id)) {
          throw std::invalid_argument("sensor '" + frame.sensor_id + "' not declared in header");
        }
        if (!(frame.bin_spacing > 0.0)) {
          throw std::invalid_argument("spacing must be > 0");
        }
        record = std::move(frame);
      } else {
        throw std::invalid_argument("unknown record type '" + type + "'");
      }
    } catch (const std::exception& e) {
      throw DatasetError(line_no, e.what());
    }
    const double t = record_time(record);
    if (!(t >= last_t)) {
      throw DatasetError(line_no, "timestamps must be non-decreasing");
    }
    last_t = t;
    dataset.records.push_back(std::move(record));
  }
  return dataset;
}

void write_dataset_file(const std::string& path, const Dataset& dataset) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open '" + path + "' for writing");
  }
  write_dataset(out, dataset);
  if (!out) {
    throw std::runtime_error("failed writing '" + path + "'");
  }
}

Dataset read_dataset_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open '" + path + "'");
  }
  return read_dataset(in);
}

}  // namespace uwbslam
