#include "uwbslam/radar_frontend.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace uwbslam {

void SignalConfig::validate() const {
  if (f_len < 3 || f_len % 2 == 0) {
    throw std::invalid_argument("f_len must be an odd integer >= 3, got " + std::to_string(f_len));
  }
  if (n < 0 || n >= f_len) {
    throw std::invalid_argument("n must satisfy 0 <= n < f_len, got " + std::to_string(n));
  }
  if (!(min_pp > 0.0)) {
    throw std::invalid_argument("min_pp must be > 0");
  }
  if (!(min_ph >= min_pp)) {
    throw std::invalid_argument("min_ph must be >= min_pp");
  }
  if (!(max_range_L >= kDefaultBin0Range && max_range_L <= kMaxDetectionRange)) {
    throw std::invalid_argument("max_range_L must lie in [0.2, 9.4] m");
  }
}

void validate_frame(const RadarFrame& frame) {
  if (!(frame.bin_spacing > 0.0)) {
    throw std::invalid_argument("frame " + frame.sensor_id + ": bin_spacing must be > 0");
  }
  for (double a : frame.amplitudes) {
    if (!std::isfinite(a) || a < 0.0) {
      throw std::invalid_argument("frame " + frame.sensor_id +
                                  ": amplitudes must be finite and non-negative");
    }
  }
}

RadarFrame statistical_filter(const RadarFrame& frame) {
  RadarFrame out = frame;
  if (frame.amplitudes.empty()) {
    return out;
  }
  const double mean = std::accumulate(frame.amplitudes.begin(), frame.amplitudes.end(), 0.0) /
                      static_cast<double>(frame.amplitudes.size());
  for (double& a : out.amplitudes) {
    if (a < mean) {
      a = 0.0;
    }
  }
  return out;
}

std::vector<double> savgol_weights(int window, int order, int eval_offset) {
  if (window < 1 || order < 0 || order >= window || eval_offset < 0 || eval_offset >= window) {
    throw std::invalid_argument("savgol_weights: invalid window/order/offset");
  }
  // Abscissae centred on the window and scaled to [-1, 1] for conditioning;
  // the fit is then evaluated at the requested sample.
  const double mid = 0.5 * (window - 1);
  const double scale = std::max(1.0, mid);
  Eigen::MatrixXd design(window, order + 1);
  for (int j = 0; j < window; ++j) {
    const double t = (j - mid) / scale;
    double power = 1.0;
    for (int k = 0; k <= order; ++k) {
      design(j, k) = power;
      power *= t;
    }
  }
  Eigen::VectorXd at(order + 1);
  const double t_eval = (eval_offset - mid) / scale;
  double power = 1.0;
  for (int k = 0; k <= order; ++k) {
    at(k) = power;
    power *= t_eval;
  }
  // w = pinv(A)^T v, from a QR factorisation rather than the normal equations.
  const Eigen::MatrixXd pinv = design.completeOrthogonalDecomposition().pseudoInverse();
  const Eigen::VectorXd w = pinv.transpose() * at;
  return {w.data(), w.data() + w.size()};
}

RadarFrame sg_smooth(const RadarFrame& frame, const SignalConfig& cfg) {
  const auto len = static_cast<int>(frame.amplitudes.size());
  if (len < cfg.f_len) {
    throw std::invalid_argument("sg_smooth: frame has " + std::to_string(len) +
                                " bins, fewer than f_len = " + std::to_string(cfg.f_len));
  }
  if (cfg.f_len % 2 == 0 || cfg.n >= cfg.f_len || cfg.n < 0) {
    throw std::invalid_argument("sg_smooth: f_len must be odd and n < f_len");
  }
  const int half = cfg.f_len / 2;
  std::vector<std::vector<double>> weights(cfg.f_len);
  for (int k = 0; k < cfg.f_len; ++k) {
    weights[k] = savgol_weights(cfg.f_len, cfg.n, k);
  }

  const auto& in = frame.amplitudes;
  RadarFrame out = frame;
  for (int i = 0; i < len; ++i) {
    int start = i - half;
    int offset = half;
    if (start < 0) {
      start = 0;
      offset = i;
    } else if (start + cfg.f_len > len) {
      start = len - cfg.f_len;
      offset = i - start;
    }
    const auto& w = weights[offset];
    double acc = 0.0;
    for (int j = 0; j < cfg.f_len; ++j) {
      acc += w[j] * in[start + j];
    }
    out.amplitudes[i] = acc;
  }
  return out;
}

std::vector<std::size_t> local_maxima(std::span<const double> x) {
  std::vector<std::size_t> peaks;
  const std::size_t len = x.size();
  if (len < 3) {
    return peaks;
  }
  std::size_t i = 1;
  while (i + 1 < len) {
    if (x[i - 1] < x[i]) {
      std::size_t ahead = i + 1;
      while (ahead + 1 < len && x[ahead] == x[i]) {
        ++ahead;
      }
      if (x[ahead] < x[i]) {
        peaks.push_back((i + ahead - 1) / 2);
        i = ahead;
        continue;
      }
    }
    ++i;
  }
  return peaks;
}

double peak_prominence(std::span<const double> x, std::size_t peak) {
  constexpr double kNoBase = -std::numeric_limits<double>::infinity();
  const double height = x[peak];

  double left_base = kNoBase;
  double running = height;
  for (std::size_t j = peak; j-- > 0;) {
    if (x[j] > height) {
      left_base = running;
      break;
    }
    running = std::min(running, x[j]);
  }

  double right_base = kNoBase;
  running = height;
  for (std::size_t j = peak + 1; j < x.size(); ++j) {
    if (x[j] > height) {
      right_base = running;
      break;
    }
    running = std::min(running, x[j]);
  }

  const double base = std::max(left_base, right_base);
  if (base == kNoBase) {
    return height - *std::min_element(x.begin(), x.end());
  }
  return height - base;
}

std::vector<RangeDetection> find_peaks(const RadarFrame& frame, const SignalConfig& cfg) {
  std::vector<RangeDetection> detections;
  const std::span<const double> signal(frame.amplitudes);
  for (std::size_t bin : local_maxima(signal)) {
    const double range = frame.bin_range(bin);
    if (range > cfg.max_range_L || signal[bin] < cfg.min_ph) {
      continue;
    }
    if (peak_prominence(signal, bin) < cfg.min_pp) {
      continue;
    }
    detections.push_back({range, signal[bin], frame.sensor_id, bin});
  }
  return detections;
}

std::vector<RangeDetection> process_frame(const RadarFrame& frame, const SignalConfig& cfg) {
  return find_peaks(sg_smooth(statistical_filter(frame), cfg), cfg);
}

}  // namespace uwbslam
