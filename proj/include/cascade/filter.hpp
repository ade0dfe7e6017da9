// Coarse-graining: mollifier kernels, subfilter stress, energy flux across
// scale, filtered acceleration and the resolved-energy budget.
#pragma once

#include <memory>
#include <string>

#include "cascade/grid.hpp"
#include "cascade/solver.hpp"

namespace cascade {

enum class KernelProfile { bump, gaussian };

std::string to_string(KernelProfile p);
KernelProfile kernel_profile_from_string(const std::string& s);

/// Unit bump exp(-1 / (1 - rho^2)) for rho < 1, else 0.
double bump_profile(double rho);

/// Per-axis second moment of the normalised unit bump in `dim` dimensions.
double bump_axis_second_moment(int dim);

/// Mollifier G_l on a grid, stored as its real spectral multiplier.
struct FilterKernel {
  Grid grid;
  KernelProfile profile = KernelProfile::bump;
  double scale = 0.0;
  std::shared_ptr<const std::vector<double>> multiplier;

  double at(std::size_t s) const { return (*multiplier)[s]; }
};

/// Cached per (profile, scale, grid). Throws std::invalid_argument when
/// scale < 2h. The bump is sampled on the grid (minimum-image distance) and
/// normalised so that the k = 0 multiplier is exactly 1; the gaussian has
/// the same per-axis second moment as the bump.
FilterKernel make_filter_kernel(const Grid& g, KernelProfile profile, double scale);

/// Physical-space weights of the sampled kernel (bump only): sum_x G(x) = 1.
std::vector<double> sampled_kernel_weights(const Grid& g, double scale);

SpectralField mollify(const SpectralField& f, const FilterKernel& k);
PhysicalField mollify(const PhysicalField& f, const FilterKernel& k);

/// tau_l(u, u) = filter(u u) - ubar ubar with dealiased products; symmetric.
/// Warns (does not reject) when u is not divergence free.
SpectralField subfilter_stress(const SpectralField& u, const FilterKernel& k);

/// Pi_l = -grad(ubar) : tau_l, pointwise.
PhysicalField flux_pi(const SpectralField& u, const FilterKernel& k);
double mean_flux(const SpectralField& u, const FilterKernel& k);

/// d/dt ubar obtained by filtering the momentum right-hand side.
SpectralField filtered_tendency(const FlowState& s, const FilterKernel& k);

/// a_l = d/dt ubar + ubar . grad ubar, pointwise on the grid, with the time
/// derivative substituted from the equations of motion.
PhysicalField filtered_acceleration(const FlowState& s, const FilterKernel& k);

/// The same acceleration assembled term by term:
/// -div tau - grad pbar + nu lap ubar + fbar - friction + (ubar.grad ubar - div P(ubar ubar)).
PhysicalField filtered_acceleration_terms(const FlowState& s, const FilterKernel& k);

struct BudgetTerms {
  PhysicalField energy_rate;   // ubar . d/dt ubar
  PhysicalField transport;     // div J
  PhysicalField flux;          // Pi_l
  PhysicalField forcing_work;  // ubar . fbar
  PhysicalField viscous;       // nu |grad ubar|^2
  PhysicalField friction;      // ubar . filter(-mu u_low)
  PhysicalField residual;      // energy_rate + transport + flux - forcing_work + viscous - friction

  double mean_energy_rate = 0.0;
  double mean_transport = 0.0;
  double mean_flux = 0.0;
  double mean_forcing_work = 0.0;
  double mean_viscous = 0.0;
  double mean_friction = 0.0;
  double mean_residual = 0.0;
  double residual_rms = 0.0;
  double resolved_energy = 0.0;  // <|ubar|^2> / 2

  /// -<Pi> + <ubar.fbar> - nu<|grad ubar|^2> + friction: the global rate.
  double global_rate() const { return -mean_flux + mean_forcing_work - mean_viscous + mean_friction; }
};

BudgetTerms resolved_budget(const FlowState& s, const FilterKernel& k);

}  // namespace cascade
