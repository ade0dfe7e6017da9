// Experiment description: everything a run, a dispersion analysis and the
// diagnostics need, resolved from a layered config (preset, file, flags).
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cascade/config.hpp"
#include "cascade/filter.hpp"
#include "cascade/forcing.hpp"
#include "cascade/interpolation.hpp"
#include "cascade/separation.hpp"
#include "cascade/solver.hpp"

namespace cascade {

struct InitialSpec {
  std::string kind = "zero";  // zero | taylor_green | random | shear | uniform | snapshot
  double amplitude = 1.0;
  int kmax = 4;
  double slope = 0.0;  // random: |u_k| ~ |k|^slope before projection
  std::uint64_t seed = 1;
  std::vector<double> velocity;  // uniform
  std::string file;              // snapshot
};

struct OutputSpec {
  std::int64_t series_every = 1;
  std::int64_t snapshot_every = 0;
  std::int64_t checkpoint_every = 0;
  std::vector<double> release_times;
  int window_steps = 4;  // stored steps on each side of a release time
  // steps over which the resolved budget at the first filter scale is integrated
  std::int64_t resolved_budget_steps = 100;
};

struct DispersionSpec {
  double radius_factor = 3.0;  // R = factor * l
  SeparationProfile profile = SeparationProfile::bump;
  int directions = 0;
  int radii = 4;
  int lattice = 0;  // base points per axis; 0 = 16 (2D) / 8 (3D)
  double tau_min_factor = 1e-3;
  int lags = 7;
  InterpolationScheme interpolation = InterpolationScheme::cubic;
  int refine = 2;
  int substeps = 4;
  double fit_threshold = 0.1;
  bool frozen = false;  // advect in the release snapshot held fixed in time
};

struct DiagnosticsSpec {
  double inertial_min = 0.0;  // declared window in length units; 0 = unset
  double inertial_max = 0.0;
  int structure_points = 8;   // r samples across the window for S3L
  double spectrum_kmin = 0.0;
  double spectrum_kmax = 0.0;
};

struct ExperimentSpec {
  std::string name = "experiment";
  std::uint64_t seed = 1;
  bool deterministic = true;
  int threads = 1;
  std::filesystem::path output = "out";

  Grid grid{2, 64};
  double nu = 0.0;
  double friction = 0.0;
  Formulation formulation = Formulation::automatic;

  InitialSpec initial;
  double dt = 1e-3;       // fixed step, or the ceiling when cfl > 0
  double cfl = 0.0;       // > 0: adaptive dt = min(dt, cfl h / max|u|)
  std::int64_t steps = 0;
  double t_end = 0.0;     // used when steps == 0

  ForcingSpec forcing;
  OutputSpec output_spec;

  KernelProfile filter_profile = KernelProfile::bump;
  std::vector<double> scales;
  DispersionSpec dispersion;
  DiagnosticsSpec diagnostics;

  std::string canonical;    // effective config, sorted
  std::string config_hash;  // FNV-1a of `canonical`
  std::vector<std::string> warnings;
};

std::vector<std::string> preset_names();
/// Config text of a built-in preset; nullopt when unknown.
std::optional<std::string> preset_text(const std::string& name);

/// Layers: preset named by `preset` (or by experiment.preset in the file),
/// then the file, then `overrides`.
Config layered_config(const std::optional<std::filesystem::path>& file, const std::optional<std::string>& preset,
                      const Config& overrides = {});

/// Validates, records scale-ordering warnings and computes the config hash.
/// Output location and thread count do not enter the hash.
ExperimentSpec load_experiment(const Config& cfg);

/// Initial velocity described by `spec.initial` (solenoidal, dealiased).
SpectralField initial_velocity(const ExperimentSpec& spec);

}  // namespace cascade
