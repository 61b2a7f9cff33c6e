// Command-line front end: simulate, run, eval, plot.

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include "uwbslam/config.hpp"
#include "uwbslam/dataset.hpp"
#include "uwbslam/pipeline.hpp"
#include "uwbslam/run_io.hpp"
#include "uwbslam/simulator.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

// Input the user can fix: bad arguments, configs, scenarios and datasets.
struct ValidationFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void configure_logging() {
  spdlog::set_pattern("[%l] %v");
  const char* level = std::getenv("UWBSLAM_LOG");
  spdlog::set_level(level ? spdlog::level::from_str(level) : spdlog::level::info);
}

void write_file(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::filesystem::create_directories(p.parent_path());
  }
  std::ofstream out(p, std::ios::binary);
  if (!out || !(out << text)) {
    throw std::runtime_error("cannot write '" + path + "'");
  }
}

uwbslam::Dataset load_dataset(const std::string& path) {
  try {
    return uwbslam::read_dataset_file(path);
  } catch (const uwbslam::DatasetError& e) {
    throw ValidationFailure(path + ": " + e.what());
  }
}

int cmd_simulate(const std::string& scenario_name, const std::string& out, std::optional<std::uint64_t> seed) {
  uwbslam::Scenario sc;
  try {
    sc = uwbslam::load_scenario(scenario_name);
    if (seed) {
      sc.world.seed = *seed;
    }
    uwbslam::validate_scenario(sc);
  } catch (const std::invalid_argument& e) {
    throw ValidationFailure(e.what());
  }
  spdlog::info("simulating '{}' with seed {}", sc.name, sc.world.seed);
  const uwbslam::Dataset ds = uwbslam::simulate(sc);
  uwbslam::write_dataset_file(out, ds);
  spdlog::info("wrote {} records to {}", ds.records.size(), out);
  return kExitOk;
}

int cmd_run(const std::string& dataset_path, const std::string& config_path, const std::string& out) {
  uwbslam::RunConfig cfg;
  if (!config_path.empty()) {
    try {
      cfg = uwbslam::load_config_file(config_path);
    } catch (const uwbslam::ConfigError& e) {
      throw ValidationFailure(e.what());
    }
  }
  const uwbslam::Dataset ds = load_dataset(dataset_path);
  spdlog::info("running pipeline on {} records", ds.records.size());
  const uwbslam::RunResult result =
      uwbslam::run_pipeline(ds, cfg, [](const uwbslam::StepSnapshot& s, const uwbslam::SlamState&) {
        spdlog::debug("state {} t={:.1f} landmarks={} updates={} new={}", s.state_id, s.t, s.landmarks, s.updates,
                      s.augmented);
      });
  for (const auto& d : result.diagnostics) {
    spdlog::warn("{}", d);
  }
  uwbslam::write_run_outputs(out, ds, cfg, result);
  spdlog::info("{} states, {} EKF steps, {} landmarks; outputs in {}", result.states.size(), result.steps.size(),
               result.final_state.landmark_count(), out);
  return kExitOk;
}

int cmd_eval(const std::string& run_dir, const std::string& dataset_path, const std::string& out) {
  const uwbslam::RunArtifacts run = uwbslam::read_run_outputs(run_dir);
  const uwbslam::Dataset ds = load_dataset(dataset_path);
  if (!ds.header.ground_truth) {
    throw ValidationFailure("dataset '" + dataset_path + "' carries no ground truth");
  }
  const uwbslam::GroundTruth& gt = *ds.header.ground_truth;
  const uwbslam::EvalReport report = uwbslam::evaluate(run, gt);
  write_file(out, uwbslam::report_to_json(report));

  std::filesystem::path csv(out);
  csv.replace_extension(".trajectories.csv");
  write_file(csv.string(), uwbslam::trajectories_csv(run, gt, report));
  spdlog::info("ATE slam {:.4f} m, odometry {:.4f} m; map {}/{} matched, mean {:.4f} m", report.slam.ate_rms,
               report.odometry.ate_rms, report.map.matches.size(), report.truth_landmarks, report.map.mean_error);
  return kExitOk;
}

int cmd_plot(const std::string& run_dir, const std::string& out_dir) {
  const uwbslam::RunArtifacts run = uwbslam::read_run_outputs(run_dir);
  const std::filesystem::path dir(out_dir);
  write_file((dir / "trajectory.svg").string(), uwbslam::render_svg(run));
  // Plain copies of the plotted series for external tools.
  for (const char* name : {"trajectory.csv", "landmarks.csv", "ground_truth.csv", "truth_landmarks.csv"}) {
    const std::filesystem::path src = std::filesystem::path(run_dir) / name;
    if (std::filesystem::exists(src) &&
        !std::filesystem::equivalent(std::filesystem::path(run_dir), dir)) {
      std::filesystem::copy_file(src, dir / name, std::filesystem::copy_options::overwrite_existing);
    }
  }
  spdlog::info("wrote {}", (dir / "trajectory.svg").string());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  CLI::App app{"Anchorless UWB radar SLAM toolkit"};
  app.require_subcommand(1);

  std::string scenario;
  std::string sim_out;
  std::optional<std::uint64_t> seed;
  auto* sim = app.add_subcommand("simulate", "Generate a synthetic dataset");
  sim->add_option("--scenario", scenario, "Scenario name (square_loop, single_landmark) or JSON file")->required();
  sim->add_option("--out", sim_out, "Dataset file to write")->required();
  sim->add_option("--seed", seed, "RNG seed (defaults to the scenario's)");

  std::string dataset;
  std::string config;
  std::string run_out;
  auto* run = app.add_subcommand("run", "Run the SLAM pipeline over a dataset");
  run->add_option("--dataset", dataset, "Dataset file")->required();
  run->add_option("--config", config, "Run config JSON (defaults apply when omitted)");
  run->add_option("--out", run_out, "Run output directory")->required();

  std::string eval_run;
  std::string eval_dataset;
  std::string report;
  auto* eval = app.add_subcommand("eval", "Score a run against the dataset's ground truth");
  eval->add_option("--run", eval_run, "Run output directory")->required();
  eval->add_option("--dataset", eval_dataset, "Dataset file with ground truth")->required();
  eval->add_option("--out", report, "Report JSON to write")->required();

  std::string plot_run;
  std::string plot_out;
  auto* plot = app.add_subcommand("plot", "Render trajectories and landmark ellipses as SVG");
  plot->add_option("--run", plot_run, "Run output directory")->required();
  plot->add_option("--out", plot_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*sim) {
      return cmd_simulate(scenario, sim_out, seed);
    }
    if (*run) {
      return cmd_run(dataset, config, run_out);
    }
    if (*eval) {
      return cmd_eval(eval_run, eval_dataset, report);
    }
    if (*plot) {
      return cmd_plot(plot_run, plot_out);
    }
  } catch (const ValidationFailure& e) {
    spdlog::error("{}", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitRuntime;
  }
  return kExitOk;
}
