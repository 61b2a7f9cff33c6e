#include "uwbslam/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <tuple>

namespace uwbslam {

WorldPoint RigidTransform2D::apply(const WorldPoint& p) const {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return {c * p.x - s * p.y + tx, s * p.x + c * p.y + ty};
}

Pose2D RigidTransform2D::apply(const Pose2D& p) const {
  const WorldPoint q = apply(WorldPoint{p.x, p.y});
  return {q.x, q.y, wrap_angle(p.theta + theta)};
}

std::vector<std::pair<std::size_t, std::size_t>> timestamp_correspondences(const TrajectoryPair& pair) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  const auto& ref = pair.reference;
  if (ref.empty()) {
    return out;
  }
  double tolerance = std::numeric_limits<double>::infinity();
  if (ref.size() >= 2) {
    std::vector<double> gaps;
    for (std::size_t i = 1; i < ref.size(); ++i) {
      gaps.push_back(ref[i].t - ref[i - 1].t);
    }
    std::nth_element(gaps.begin(), gaps.begin() + static_cast<long>(gaps.size() / 2), gaps.end());
    tolerance = 0.5 * gaps[gaps.size() / 2];
  }
  for (std::size_t e = 0; e < pair.estimated.size(); ++e) {
    const double t = pair.estimated[e].t;
    const auto it = std::lower_bound(ref.begin(), ref.end(), t,
                                     [](const StampedPose& sp, double v) { return sp.t < v; });
    std::size_t best = ref.size();
    double best_gap = std::numeric_limits<double>::infinity();
    if (it != ref.end()) {
      best = static_cast<std::size_t>(it - ref.begin());
      best_gap = it->t - t;
    }
    if (it != ref.begin()) {
      const auto prev = std::prev(it);
      if (t - prev->t < best_gap) {
        best = static_cast<std::size_t>(prev - ref.begin());
        best_gap = t - prev->t;
      }
    }
    if (best < ref.size() && best_gap <= tolerance) {
      out.emplace_back(e, best);
    }
  }
  return out;
}

RigidTransform2D align(const TrajectoryPair& pair) {
  const auto corr = timestamp_correspondences(pair);
  if (corr.size() < 2) {
    throw std::invalid_argument("align: need at least two timestamp correspondences, found " +
                                std::to_string(corr.size()));
  }
  double ex = 0.0, ey = 0.0, rx = 0.0, ry = 0.0;
  for (const auto& [e, r] : corr) {
    ex += pair.estimated[e].pose.x;
    ey += pair.estimated[e].pose.y;
    rx += pair.reference[r].pose.x;
    ry += pair.reference[r].pose.y;
  }
  const double n = static_cast<double>(corr.size());
  ex /= n;
  ey /= n;
  rx /= n;
  ry /= n;
  // Rotation maximising sum r_i . R e_i over centred points.
  double dot = 0.0, cross = 0.0;
  for (const auto& [e, r] : corr) {
    const double ax = pair.estimated[e].pose.x - ex;
    const double ay = pair.estimated[e].pose.y - ey;
    const double bx = pair.reference[r].pose.x - rx;
    const double by = pair.reference[r].pose.y - ry;
    dot += ax * bx + ay * by;
    cross += ax * by - ay * bx;
  }
  RigidTransform2D tf;
  tf.theta = (dot == 0.0 && cross == 0.0) ? 0.0 : std::atan2(cross, dot);
  const double c = std::cos(tf.theta);
  const double s = std::sin(tf.theta);
  tf.tx = rx - (c * ex - s * ey);
  tf.ty = ry - (s * ex + c * ey);
  return tf;
}

double rms_ate(const TrajectoryPair& pair, const RigidTransform2D& transform) {
  const auto corr = timestamp_correspondences(pair);
  if (corr.empty()) {
    throw std::invalid_argument("rms_ate: no timestamp correspondences");
  }
  double sum = 0.0;
  for (const auto& [e, r] : corr) {
    const WorldPoint p = transform.apply(WorldPoint{pair.estimated[e].pose.x, pair.estimated[e].pose.y});
    const double dx = p.x - pair.reference[r].pose.x;
    const double dy = p.y - pair.reference[r].pose.y;
    sum += dx * dx + dy * dy;
  }
  return std::sqrt(sum / static_cast<double>(corr.size()));
}

double aligned_rms_ate(const TrajectoryPair& pair) { return rms_ate(pair, align(pair)); }

MapError map_error(const std::vector<WorldPoint>& estimated, const std::vector<WorldPoint>& truth,
                   const RigidTransform2D& transform, double gate) {
  std::vector<std::tuple<double, std::size_t, std::size_t>> candidates;
  std::vector<WorldPoint> moved;
  moved.reserve(estimated.size());
  for (const WorldPoint& p : estimated) {
    moved.push_back(transform.apply(p));
  }
  for (std::size_t e = 0; e < moved.size(); ++e) {
    for (std::size_t t = 0; t < truth.size(); ++t) {
      const double d = distance(moved[e], truth[t]);
      if (d <= gate) {
        candidates.emplace_back(d, e, t);
      }
    }
  }
  std::sort(candidates.begin(), candidates.end());
  std::vector<bool> used_e(estimated.size(), false);
  std::vector<bool> used_t(truth.size(), false);
  MapError result;
  double sum = 0.0;
  for (const auto& [d, e, t] : candidates) {
    if (used_e[e] || used_t[t]) {
      continue;
    }
    used_e[e] = true;
    used_t[t] = true;
    result.matches.push_back({e, t, d});
    sum += d;
  }
  if (!result.matches.empty()) {
    result.mean_error = sum / static_cast<double>(result.matches.size());
  }
  for (std::size_t e = 0; e < estimated.size(); ++e) {
    if (!used_e[e]) {
      result.unmatched_estimated.push_back(e);
    }
  }
  for (std::size_t t = 0; t < truth.size(); ++t) {
    if (!used_t[t]) {
      result.unmatched_truth.push_back(t);
    }
  }
  return result;
}

}  // namespace uwbslam
