#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace uwbslam {

inline constexpr std::size_t kRawFrameBins = 1431;
inline constexpr double kDefaultBin0Range = 0.2;     // m, start of detection zone
inline constexpr double kDefaultBinSpacing = 0.0064; // m
inline constexpr double kMaxDetectionRange = 9.4;    // m

/// One sensor's amplitude-vs-range sweep (magnitudes, normalized to [0, 1]).
struct RadarFrame {
  std::string sensor_id;
  std::vector<double> amplitudes;
  double bin0_range = kDefaultBin0Range;
  double bin_spacing = kDefaultBinSpacing;
  double timestamp = 0.0;

  double bin_range(std::size_t bin) const {
    return bin0_range + static_cast<double>(bin) * bin_spacing;
  }
};

struct SignalConfig {
  int f_len = 15;          // Savitzky-Golay window, odd
  int n = 5;               // Savitzky-Golay polynomial order
  double min_ph = 5.5e-3;  // minimum peak height
  double min_pp = 3e-3;    // minimum peak prominence
  double max_range_L = 1.5;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct RangeDetection {
  double range = 0.0;
  double amplitude = 0.0;
  std::string sensor_id;
  std::size_t bin = 0;
};

/// Throws std::invalid_argument if the frame breaks its invariants.
void validate_frame(const RadarFrame& frame);

/// Zeroes every amplitude strictly below the raw frame mean.
RadarFrame statistical_filter(const RadarFrame& frame);

/// Least-squares polynomial smoothing. Near the frame ends the window is
/// held inside the frame and the fitted polynomial is evaluated off-centre.
RadarFrame sg_smooth(const RadarFrame& frame, const SignalConfig& cfg);

/// Convolution weights for evaluating a window of `window` samples at
/// `eval_offset` (0 .. window-1) under a degree-`order` least-squares fit.
std::vector<double> savgol_weights(int window, int order, int eval_offset);

/// Prominence of the local maximum at `peak`. A side that reaches the frame
/// edge without meeting higher terrain imposes no base; the highest summit
/// falls back to its height above the frame minimum.
double peak_prominence(std::span<const double> signal, std::size_t peak);

/// Indices of local maxima (plateaus resolve to their middle sample).
std::vector<std::size_t> local_maxima(std::span<const double> signal);

std::vector<RangeDetection> find_peaks(const RadarFrame& frame, const SignalConfig& cfg);

/// statistical_filter -> sg_smooth -> find_peaks.
std::vector<RangeDetection> process_frame(const RadarFrame& frame, const SignalConfig& cfg);

}  // namespace uwbslam
