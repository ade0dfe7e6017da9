// Eulerian statistics: energy spectra, structure functions, the 4/5-law
// comparison, flux profiles across filter scales and scale reports.
#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cascade/filter.hpp"
#include "cascade/grid.hpp"
#include "cascade/separation.hpp"
#include "cascade/solver.hpp"

namespace cascade {

struct SpectrumSeries {
  double t = 0.0;
  std::vector<double> k;       // shell index 0, 1, 2, ...
  std::vector<double> energy;  // 1/2 sum |u_k|^2 over round(|k|) == shell
  double total() const;
};

SpectrumSeries energy_spectrum(const SpectralField& u, double t = 0.0);

/// Least-squares slope of log E against log k over kmin <= k <= kmax,
/// skipping empty shells.
double spectrum_slope(const SpectrumSeries& s, double kmin, double kmax);

/// Exact periodic translation f(x + r); along an axis at Nyquist the mode is
/// treated as split evenly between +-n/2, which keeps the result real.
SpectralField shift_field(const SpectralField& f, const Vec3& r);

/// Spatial mean of |u(x + r) - u(x)|^2.
double structure_function_2(const SpectralField& u, const Vec3& r);
std::vector<double> structure_function_2(const SpectralField& u, std::span<const Vec3> r);

/// (1/|r|) times the direction average of <(rhat . delta u)^3>, for each
/// magnitude. `directions` = 0 picks the filter default (32 in 2D, 64 in 3D).
std::vector<double> structure_function_3L(const SpectralField& u, std::span<const double> r, int directions = 0);

/// -12 / (d (d + 2)).
double four_fifths_coefficient(int dim);

struct FourFifthsRow {
  double r = 0.0;
  double s3l = 0.0;
  double mean_flux = 0.0;   // <Pi_l> at l = r
  double predicted = 0.0;   // coefficient * <Pi_l>
  double ratio = 0.0;       // s3l / predicted
  bool indeterminate = false;  // both sides below the floor
};

struct FourFifthsTable {
  int dim = 3;
  double coefficient = 0.0;
  double floor = 1e-10;
  std::vector<FourFifthsRow> rows;
};

FourFifthsTable four_fifths_check(const SpectralField& u, std::span<const double> r, KernelProfile profile,
                                  int directions = 0, double floor = 1e-10);

struct FluxProfile {
  std::vector<double> ell;
  std::vector<double> mean_flux;
  std::vector<double> turnover;  // tau_l from the filtered field
  double dissipation = 0.0;      // nu <|grad u|^2>
  double input = 0.0;            // <u . f>
};

/// Throws std::invalid_argument unless the scales increase strictly and are
/// at least 2h.
FluxProfile flux_profile(const FlowState& s, std::span<const double> ell, KernelProfile profile);

struct ScaleReport {
  double energy = 0.0;
  double dissipation = 0.0;
  std::optional<double> kolmogorov_length;  // (nu^3 / eps)^(1/4)
  std::optional<double> kolmogorov_time;    // (nu / eps)^(1/2)
  double integral_scale = 0.0;              // 2 pi / spectral centroid
  double rms_velocity = 0.0;                // per component
  std::optional<double> reynolds;           // rms * L / nu
  std::vector<std::string> warnings;
};

/// Scale orderings l_nu < l_min, l_max < R < L/2 are checked when the lists
/// are given; violations are recorded and sent to the warning sink.
ScaleReport scale_report(const FlowState& s, std::span<const double> ell = {}, double radius = 0.0);

}  // namespace cascade
