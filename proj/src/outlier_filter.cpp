#include "uwbslam/outlier_filter.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace uwbslam {

void FilterConfig::validate() const {
  if (window_size < 1) {
    throw std::invalid_argument("window_size must be >= 1");
  }
  if (min_opc < 1) {
    throw std::invalid_argument("min_opc must be >= 1");
  }
  if (!(search_rad > 0.0)) {
    throw std::invalid_argument("search_rad must be > 0");
  }
  if (!(min_disp_translation >= 0.0) || !(min_disp_rotation >= 0.0)) {
    throw std::invalid_argument("min_disp thresholds must be >= 0");
  }
}

bool exceeds_min_disp(const Pose2D& previous, const Pose2D& current, const FilterConfig& cfg) {
  const double translation = std::hypot(current.x - previous.x, current.y - previous.y);
  const double rotation = std::abs(wrap_angle(current.theta - previous.theta));
  return translation > cfg.min_disp_translation || rotation > cfg.min_disp_rotation;
}

DbscanResult dbscan(std::span<const WorldPoint> points, double eps, int min_pts) {
  if (!(eps > 0.0) || min_pts < 1) {
    throw std::invalid_argument("dbscan: eps must be > 0 and min_pts >= 1");
  }
  const std::size_t n = points.size();
  const double eps2 = eps * eps;
  std::vector<std::vector<std::size_t>> neighbours(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double dx = points[i].x - points[j].x;
      const double dy = points[i].y - points[j].y;
      if (dx * dx + dy * dy <= eps2) {
        neighbours[i].push_back(j);
      }
    }
  }
  std::vector<bool> core(n);
  for (std::size_t i = 0; i < n; ++i) {
    core[i] = neighbours[i].size() >= static_cast<std::size_t>(min_pts);
  }

  DbscanResult result;
  result.labels.assign(n, -1);
  int next_label = 0;
  std::vector<std::size_t> stack;
  for (std::size_t seed = 0; seed < n; ++seed) {
    if (!core[seed] || result.labels[seed] != -1) {
      continue;
    }
    const int label = next_label++;
    result.labels[seed] = label;
    stack.assign(1, seed);
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      for (std::size_t q : neighbours[p]) {
        if (core[q] && result.labels[q] == -1) {
          result.labels[q] = label;
          stack.push_back(q);
        }
      }
    }
  }
  // Neighbour lists are in index order, so the first core found is the lowest.
  for (std::size_t i = 0; i < n; ++i) {
    if (core[i]) {
      continue;
    }
    for (std::size_t q : neighbours[i]) {
      if (core[q]) {
        result.labels[i] = result.labels[q];
        break;
      }
    }
  }

  result.clusters.resize(static_cast<std::size_t>(next_label));
  for (std::size_t i = 0; i < n; ++i) {
    if (result.labels[i] >= 0) {
      result.clusters[static_cast<std::size_t>(result.labels[i])].push_back(i);
    }
  }
  return result;
}

ProvisionalWindow::ProvisionalWindow(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) {
    throw std::invalid_argument("ProvisionalWindow: capacity must be >= 1");
  }
}

void ProvisionalWindow::advance(WindowEntry entry) {
  if (!entries_.empty() && entry.state_id <= entries_.back().state_id) {
    throw std::invalid_argument("ProvisionalWindow: state ids must strictly increase");
  }
  entries_.push_back(std::move(entry));
  while (entries_.size() > capacity_) {
    entries_.pop_front();
  }
}

FilteredWindow filter_window_detailed(const ProvisionalWindow& window, const FilterConfig& cfg) {
  if (!window.full()) {
    throw std::logic_error("filter_window: window holds " + std::to_string(window.size()) +
                           " of " + std::to_string(window.capacity()) + " states");
  }
  FilteredWindow out;
  const WindowEntry& first = window.front();
  std::vector<PairSide> sides;
  for (const WindowEntry& entry : window.entries()) {
    const Pose2D local = relative(first.odom_pose, entry.odom_pose);
    for (const RangeBearingObs& z : entry.observations) {
      out.points.push_back(obs_to_world(local, z));
      sides.push_back(z.source_pair);
    }
  }
  out.clustering = dbscan(out.points, cfg.search_rad, cfg.min_opc);

  for (const auto& members : out.clustering.clusters) {
    WorldPoint centroid;
    for (std::size_t idx : members) {
      centroid.x += out.points[idx].x;
      centroid.y += out.points[idx].y;
    }
    centroid.x /= static_cast<double>(members.size());
    centroid.y /= static_cast<double>(members.size());
    if (centroid.x == 0.0 && centroid.y == 0.0) {
      continue;
    }
    RangeBearingObs z = world_to_obs(Pose2D{}, centroid);
    z.state_id = first.state_id;
    z.source_pair = sides[members.front()];
    out.centroids.push_back(z);
  }
  return out;
}

std::vector<RangeBearingObs> filter_window(const ProvisionalWindow& window, const FilterConfig& cfg) {
  return filter_window_detailed(window, cfg).centroids;
}

}  // namespace uwbslam
