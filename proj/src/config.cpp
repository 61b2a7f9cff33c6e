#include "uwbslam/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json_codec.hpp"

namespace uwbslam {

using codec::Json;

namespace {

void require(bool ok, const std::string& parameter, const std::string& rule) {
  if (!ok) {
    throw ConfigError(parameter, "config parameter '" + parameter + "' " + rule);
  }
}

void require_range(double value, double lo, double hi, const std::string& parameter) {
  std::ostringstream rule;
  rule << "must lie in [" << lo << ", " << hi << "], got " << value;
  require(std::isfinite(value) && value >= lo && value <= hi, parameter, rule.str());
}

}  // namespace

ConfigError::ConfigError(std::string parameter, const std::string& what)
    : std::invalid_argument(what), parameter_(std::move(parameter)) {}

NoiseConfig NoiseSigmas::to_noise() const {
  return NoiseConfig::from_sigmas(sigma_x, sigma_y, sigma_theta, sigma_r, sigma_phi, alpha);
}

void RunConfig::validate() const {
  require(signal.f_len >= 3 && signal.f_len % 2 == 1, "f_len", "must be an odd integer >= 3");
  require(signal.n >= 0 && signal.n < signal.f_len, "n", "must satisfy 0 <= n < f_len");
  require(signal.min_pp > 0.0, "min_pp", "must be > 0");
  require(signal.min_ph >= signal.min_pp, "min_ph", "must be >= min_pp");
  require_range(signal.max_range_L, 0.20, 9.40, "L");

  require(filter.window_size >= 1, "window_size", "must be >= 1");
  require(filter.min_opc >= 1, "min_opc", "must be >= 1");
  require(filter.search_rad > 0.0, "search_rad", "must be > 0");
  require(filter.min_disp_translation >= 0.0, "min_disp_translation", "must be >= 0");
  require(filter.min_disp_rotation >= 0.0, "min_disp_rotation", "must be >= 0");

  require(noise.sigma_x > 0.0, "sigma_x", "must be > 0");
  require(noise.sigma_y > 0.0, "sigma_y", "must be > 0");
  require(noise.sigma_theta > 0.0, "sigma_theta", "must be > 0");
  require(noise.sigma_r > 0.0, "sigma_r", "must be > 0");
  require(noise.sigma_phi > 0.0, "sigma_phi", "must be > 0");
  require_range(noise.alpha, 0.5, 3.0, "alpha");

  if (geometry) {
    require_range(geometry->d, 0.10, 0.30, "d");
    require_range(geometry->s, 0.05, 0.30, "s");
    require(geometry->theta_fov > 0.0 && geometry->theta_fov < kPi, "theta_fov", "must lie in (0, pi)");
  }
}

RunConfig parse_config(const std::string& json_text) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const std::exception& e) {
    throw ConfigError("<file>", std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) {
    throw ConfigError("<file>", "config must be a JSON object");
  }
  RunConfig cfg;
  try {
    if (j.contains("version") && j.at("version").get<int>() != kConfigFormatVersion) {
      throw ConfigError("version", "unsupported config version");
    }
    if (j.contains("signal")) {
      const Json& s = j.at("signal");
      cfg.signal = codec::signal_from_json(s, cfg.signal);
      cfg.signal.max_range_L = s.value("L", cfg.signal.max_range_L);
    }
    if (j.contains("filter")) {
      cfg.filter = codec::filter_from_json(j.at("filter"), cfg.filter);
    }
    if (j.contains("noise")) {
      const Json& n = j.at("noise");
      cfg.noise.sigma_x = n.value("sigma_x", cfg.noise.sigma_x);
      cfg.noise.sigma_y = n.value("sigma_y", cfg.noise.sigma_y);
      cfg.noise.sigma_theta = n.value("sigma_theta", cfg.noise.sigma_theta);
      cfg.noise.sigma_r = n.value("sigma_r", cfg.noise.sigma_r);
      cfg.noise.sigma_phi = n.value("sigma_phi", cfg.noise.sigma_phi);
      cfg.noise.alpha = n.value("alpha", cfg.noise.alpha);
    }
    if (j.contains("geometry") && !j.at("geometry").is_null()) {
      const Json& g = j.at("geometry");
      GeometryConfig geo;
      geo.d = g.value("d", geo.d);
      geo.s = g.value("s", geo.s);
      if (g.contains("theta_fov_deg")) {
        geo.theta_fov = deg_to_rad(g.at("theta_fov_deg").get<double>());
      }
      geo.theta_fov = g.value("theta_fov", geo.theta_fov);
      cfg.geometry = geo;
    }
    cfg.seed = j.value("seed", cfg.seed);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("<file>", std::string("config has a field of the wrong type: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("<file>", "cannot open config '" + path + "'");
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string dump_config(const RunConfig& cfg) {
  Json j;
  j["format"] = "uwbslam-config";
  j["version"] = kConfigFormatVersion;
  j["signal"] = codec::to_json(cfg.signal);
  j["filter"] = codec::to_json(cfg.filter);
  j["noise"] = {{"sigma_x", cfg.noise.sigma_x},         {"sigma_y", cfg.noise.sigma_y},
                {"sigma_theta", cfg.noise.sigma_theta}, {"sigma_r", cfg.noise.sigma_r},
                {"sigma_phi", cfg.noise.sigma_phi},     {"alpha", cfg.noise.alpha}};
  if (cfg.geometry) {
    j["geometry"] = {{"d", cfg.geometry->d}, {"s", cfg.geometry->s}, {"theta_fov", cfg.geometry->theta_fov}};
  } else {
    j["geometry"] = nullptr;
  }
  j["seed"] = cfg.seed;
  return j.dump(2);
}

}  // namespace uwbslam
