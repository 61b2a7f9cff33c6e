#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "uwbslam/ekf_slam.hpp"
#include "uwbslam/outlier_filter.hpp"
#include "uwbslam/radar_frontend.hpp"

namespace uwbslam {

inline constexpr int kConfigFormatVersion = 1;

/// Mounting geometry override; when absent the dataset's rig is used.
struct GeometryConfig {
  double d = 0.20;
  double s = 0.20;
  double theta_fov = deg_to_rad(65.0);
};

struct NoiseSigmas {
  double sigma_x = 1e-4;
  double sigma_y = 1e-4;
  double sigma_theta = 0.02;
  double sigma_r = 0.15;
  double sigma_phi = 1.0;
  double alpha = 0.6;

  NoiseConfig to_noise() const;
};

struct RunConfig {
  SignalConfig signal;
  FilterConfig filter;
  NoiseSigmas noise;
  std::optional<GeometryConfig> geometry;
  std::uint64_t seed = 0;

  /// Rejects values outside the documented parameter ranges.
  void validate() const;
};

/// Thrown by validation; `parameter()` names the offending field.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string parameter, const std::string& what);
  const std::string& parameter() const { return parameter_; }

 private:
  std::string parameter_;
};

/// Missing fields keep their defaults. Throws ConfigError.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config_file(const std::string& path);
std::string dump_config(const RunConfig& cfg);

}  // namespace uwbslam
