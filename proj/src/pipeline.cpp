#include "uwbslam/pipeline.hpp"

#include <map>
#include <stdexcept>

#include "uwbslam/radar_frontend.hpp"
#include "uwbslam/trilateration.hpp"

namespace uwbslam {

Pipeline::Pipeline(RigConfig rig, RunConfig cfg)
    : rig_(std::move(rig)),
      cfg_(std::move(cfg)),
      noise_(cfg_.noise.to_noise()),
      window_(static_cast<std::size_t>(cfg_.filter.window_size)) {
  rig_.validate();
  cfg_.validate();
}

std::vector<RangeBearingObs> Pipeline::observe(const std::vector<const FrameRecord*>& frames,
                                               std::int64_t state_id) const {
  std::map<std::string, const FrameRecord*> by_sensor;
  for (const FrameRecord* f : frames) {
    by_sensor[f->sensor_id] = f;
  }
  std::vector<RangeBearingObs> out;
  for (const SensorPairGeometry& pair : rig_.pairs) {
    const auto a = by_sensor.find(pair.sensor_ids[0]);
    const auto b = by_sensor.find(pair.sensor_ids[1]);
    if (a == by_sensor.end() || b == by_sensor.end()) {
      continue;
    }
    const auto det1 = process_frame(a->second->to_frame(), cfg_.signal);
    const auto det2 = process_frame(b->second->to_frame(), cfg_.signal);
    auto obs = trilaterate_all(det1, det2, pair, state_id);
    out.insert(out.end(), obs.begin(), obs.end());
  }
  return out;
}

void Pipeline::process_tick(double t, const std::optional<Pose2D>& odom,
                            const std::vector<const FrameRecord*>& frames) {
  if (!odom) {
    return;
  }
  if (!previous_pose_) {
    // Odom[0]: the filter starts here with zero uncertainty.
    previous_pose_ = *odom;
    last_estimated_odom_ = *odom;
    slam_.mean.head<3>() = Eigen::Vector3d(odom->x, odom->y, odom->theta);
    return;
  }
  if (!exceeds_min_disp(*previous_pose_, *odom, cfg_.filter)) {
    return;
  }
  previous_pose_ = *odom;

  const std::int64_t id = next_state_id_++;
  StateRecord record;
  record.state_id = id;
  record.t = t;
  record.odom = *odom;
  record.raw = observe(frames, id);
  window_.advance({id, *odom, record.raw});
  result_.states.push_back(std::move(record));

  if (!window_.full()) {
    return;
  }
  const WindowEntry& first = window_.front();
  std::vector<RangeBearingObs> filtered = filter_window(window_, cfg_.filter);
  const Pose2D u = relative(last_estimated_odom_, first.odom_pose);
  last_estimated_odom_ = first.odom_pose;

  const StepReport report = step(slam_, u, filtered, noise_);
  for (const auto& msg : report.diagnostics) {
    result_.diagnostics.push_back("state " + std::to_string(first.state_id) + ": " + msg);
  }

  StateRecord& consumed = result_.states.at(static_cast<std::size_t>(first.state_id - 1));
  consumed.filtered = std::move(filtered);

  StepSnapshot snap;
  snap.state_id = first.state_id;
  snap.t = consumed.t;
  snap.odom = first.odom_pose;
  snap.slam = slam_.pose();
  snap.pose_cov = slam_.pose_cov();
  snap.landmarks = slam_.landmark_count();
  for (const auto& o : report.outcomes) {
    if (o.landmark) {
      snap.updates += o.applied ? 1 : 0;
    } else {
      ++snap.augmented;
    }
  }
  result_.steps.push_back(snap);
  if (observer_) {
    observer_(snap, slam_);
  }
}

RunResult Pipeline::take_result() {
  result_.final_state = slam_;
  return std::move(result_);
}

RigConfig effective_rig(const DatasetHeader& header, const RunConfig& cfg) {
  RigConfig rig = header.rig;
  if (cfg.geometry) {
    for (auto& pair : rig.pairs) {
      pair.d = cfg.geometry->d;
      pair.s = cfg.geometry->s;
      pair.theta_fov = cfg.geometry->theta_fov;
    }
  }
  return rig;
}

RunResult run_pipeline(const Dataset& dataset, const RunConfig& cfg, Pipeline::StepObserver observer) {
  Pipeline pipeline(effective_rig(dataset.header, cfg), cfg);
  pipeline.set_step_observer(std::move(observer));

  std::size_t i = 0;
  const auto& records = dataset.records;
  std::vector<const FrameRecord*> frames;
  while (i < records.size()) {
    const double t = record_time(records[i]);
    std::optional<Pose2D> odom;
    frames.clear();
    for (; i < records.size() && record_time(records[i]) == t; ++i) {
      if (const auto* o = std::get_if<OdomSample>(&records[i])) {
        odom = o->pose;
      } else {
        frames.push_back(&std::get<FrameRecord>(records[i]));
      }
    }
    pipeline.process_tick(t, odom, frames);
  }
  return pipeline.take_result();
}

}  // namespace uwbslam
