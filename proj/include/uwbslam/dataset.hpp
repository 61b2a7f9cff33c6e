#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "uwbslam/geometry.hpp"
#include "uwbslam/radar_frontend.hpp"
#include "uwbslam/trilateration.hpp"

namespace uwbslam {

inline constexpr int kDatasetFormatVersion = 1;

struct StampedPose {
  double t = 0.0;
  Pose2D pose;
};

struct Landmark {
  WorldPoint position;
  double rcs = 0.01;
};

/// Sensor pairs mounted on the robot, left pair first by convention.
struct RigConfig {
  std::vector<SensorPairGeometry> pairs{SensorPairGeometry::left(), SensorPairGeometry::right()};

  std::vector<std::string> sensor_ids() const;
  void validate() const;
};

struct GroundTruth {
  std::vector<Landmark> landmarks;
  std::vector<StampedPose> trajectory;
};

struct DatasetHeader {
  int version = kDatasetFormatVersion;
  std::string scenario;
  std::uint64_t seed = 0;
  RigConfig rig;
  SignalConfig signal;
  std::vector<std::string> sensors;
  std::optional<GroundTruth> ground_truth;
};

struct OdomSample {
  double t = 0.0;
  Pose2D pose;
};

/// Raw frame as stored on disk: binary32 amplitudes.
struct FrameRecord {
  double t = 0.0;
  std::string sensor_id;
  double bin0_range = kDefaultBin0Range;
  double bin_spacing = kDefaultBinSpacing;
  std::vector<float> amplitudes;

  RadarFrame to_frame() const;
};

using Record = std::variant<OdomSample, FrameRecord>;

double record_time(const Record& record);

struct Dataset {
  DatasetHeader header;
  std::vector<Record> records;
};

/// Malformed dataset input; `line()` is 1-based, 0 when not line-specific.
class DatasetError : public std::runtime_error {
 public:
  DatasetError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

void write_dataset(std::ostream& out, const Dataset& dataset);
Dataset read_dataset(std::istream& in);

void write_dataset_file(const std::string& path, const Dataset& dataset);
Dataset read_dataset_file(const std::string& path);

}  // namespace uwbslam
