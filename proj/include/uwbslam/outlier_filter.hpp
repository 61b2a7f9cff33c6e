#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <span>
#include <vector>

#include "uwbslam/geometry.hpp"

namespace uwbslam {

struct FilterConfig {
  int window_size = 15;
  int min_opc = 9;
  double search_rad = 0.20;
  double min_disp_translation = 0.005;  // m
  double min_disp_rotation = 0.1;       // rad

  void validate() const;
};

/// True when the odometry moved more than either displacement threshold.
bool exceeds_min_disp(const Pose2D& previous, const Pose2D& current, const FilterConfig& cfg);

struct DbscanResult {
  std::vector<std::vector<std::size_t>> clusters;  // point indices, ascending
  std::vector<int> labels;                         // cluster id per point, -1 = noise
};

/// DBSCAN over Euclidean 2D distance.
///
/// A point is core when at least `min_pts` points (itself included) lie
/// within `eps`. Clusters are the connected components of core points,
/// numbered by their lowest-index core. A border point joins the cluster of
/// the lowest-index core point that reaches it.
DbscanResult dbscan(std::span<const WorldPoint> points, double eps, int min_pts);

struct WindowEntry {
  std::int64_t state_id = 0;
  Pose2D odom_pose;
  std::vector<RangeBearingObs> observations;
};

/// Odometry-tagged observation buffer of the most recent states.
class ProvisionalWindow {
 public:
  explicit ProvisionalWindow(std::size_t capacity);

  /// Appends a state, evicting the oldest when over capacity. State ids must
  /// strictly increase.
  void advance(WindowEntry entry);

  bool full() const { return entries_.size() == capacity_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }
  const std::deque<WindowEntry>& entries() const { return entries_; }
  const WindowEntry& front() const { return entries_.front(); }

 private:
  std::size_t capacity_;
  std::deque<WindowEntry> entries_;
};

struct FilteredWindow {
  std::vector<WorldPoint> points;  // in the frame of the window's first pose
  DbscanResult clustering;
  std::vector<RangeBearingObs> centroids;  // relative to the first pose
};

/// Projects every windowed observation into the first pose's frame using the
/// recorded odometry, clusters them, and re-expresses each cluster centroid
/// as an observation taken from the first pose. Throws std::logic_error when
/// the window is not full.
FilteredWindow filter_window_detailed(const ProvisionalWindow& window, const FilterConfig& cfg);

std::vector<RangeBearingObs> filter_window(const ProvisionalWindow& window, const FilterConfig& cfg);

}  // namespace uwbslam
