// Driving a solver run from an experiment spec: time loop, forcing, stored
// snapshots (regular cadence plus windows around release times), time
// series, checkpoints and the manifest.
//
// Output directory layout:
//   manifest.txt         key=value, includes config_hash
//   series.csv           one row per series_every steps
//   windows.txt          release index -> stored step range
//   snapshots/step_NNNNNNNN.bin
//   checkpoint.bin, checkpoint.txt
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cascade/experiment.hpp"
#include "cascade/snapshot_io.hpp"

namespace cascade {

struct ReleaseWindow {
  double requested_time = 0.0;
  double time = 0.0;
  std::int64_t step = -1;  // -1: never reached
  std::int64_t first_step = 0;
  std::int64_t last_step = 0;
  bool complete = false;
};

struct RunSummary {
  std::int64_t first_step = 0;
  std::int64_t last_step = 0;
  double t_final = 0.0;
  double max_budget_residual = 0.0;            // trapezoid, relative, worst step
  double max_budget_residual_corrected = 0.0;  // with the endpoint derivative correction
  double max_divergence = 0.0;
  // resolved energy at the first filter scale: |dE - integral of the rate|
  // over the integrated steps, relative to the integral of the term magnitudes
  std::optional<double> resolved_budget_residual;
  std::optional<double> resolved_budget_residual_corrected;
  std::int64_t resolved_budget_steps = 0;
  std::optional<double> taylor_green_error;
  std::vector<ReleaseWindow> windows;
  std::size_t snapshots_written = 0;
};

/// Runs the experiment into `out`. With `restart`, continues from the
/// checkpoint in that directory (its config hash must match). Throws
/// NumericalAbort after writing abort_snapshot.bin if the state goes
/// non-finite.
RunSummary run_experiment(const ExperimentSpec& spec, const std::filesystem::path& out,
                          const std::optional<std::filesystem::path>& restart = std::nullopt);

std::filesystem::path snapshot_path(const std::filesystem::path& run_dir, std::int64_t step);

/// Release windows recorded by a run.
std::vector<ReleaseWindow> read_windows(const std::filesystem::path& run_dir);

/// Stored snapshots of one window, in time order. Throws MissingData when a
/// file is absent or the window was not completed.
std::vector<FlowSnapshot> load_window(const std::filesystem::path& run_dir, const ReleaseWindow& w);

/// Time series columns by name.
struct TimeSeries {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<double> column(const std::string& name) const;
};
TimeSeries read_time_series(const std::filesystem::path& csv);

inline constexpr const char* kVersion = "1.0.0";

}  // namespace cascade
