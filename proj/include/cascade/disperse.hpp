// Dispersion-asymmetry pipeline over a finished run: for each filter scale
// and release time, filter the stored window, advect tracer pairs forward
// and backward, fit the asymmetry and compare it with the Eulerian
// estimates and the same-run flux, dissipation and input.
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cascade/experiment.hpp"
#include "cascade/run.hpp"
#include "cascade/tracers.hpp"

namespace cascade {

struct AnomalyReport {
  std::string config_hash;
  int dim = 2;
  int n = 0;
  double nu = 0.0;
  double friction = 0.0;
  std::size_t release_index = 0;
  std::size_t scale_index = 0;
  double t0 = 0.0;
  double ell = 0.0;
  double radius = 0.0;
  double tau_ell = 0.0;
  bool frozen = false;

  AsymmetryFit fit;
  double om_lagrangian = 0.0;
  double om_eulerian = 0.0;        // on the tracer lattice
  double om_eulerian_torus = 0.0;  // full-grid average
  double mean_flux = 0.0;          // <Pi_l>
  double dissipation = 0.0;        // nu <|grad u|^2>
  double input = 0.0;              // <u.f>, force averaged across t0
  double friction_loss = 0.0;
  std::vector<std::string> warnings;
};

/// Reports for every (scale, release) pair, ordered scale-major. Uses
/// `spec.threads` workers. Throws MissingData when a window is absent or
/// too short for the largest lag.
std::vector<AnomalyReport> disperse(const ExperimentSpec& spec, const std::filesystem::path& run_dir);

/// One (scale, release) job from already loaded snapshots (window in time
/// order, or a single snapshot with `frozen`).
AnomalyReport disperse_one(const ExperimentSpec& spec, const std::vector<FlowSnapshot>& window, double t0,
                           double ell, bool frozen);

/// report_<scale>_<release>.txt (key=value) and dispersion_<scale>_<release>.csv.
void write_anomaly_report(const std::filesystem::path& dir, const AnomalyReport& r);
KeyValues anomaly_report_values(const AnomalyReport& r);

}  // namespace cascade
