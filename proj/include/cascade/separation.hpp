// Deterministic quadrature over separations r in the ball |r| < R, weighted
// by a radial kernel psi_R, and the associated separation average <F>_R.
#pragma once

#include <array>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cascade/grid.hpp"

namespace cascade {

enum class SeparationProfile { bump, gaussian_truncated };

std::string to_string(SeparationProfile p);
SeparationProfile separation_profile_from_string(const std::string& s);

/// Unit radial profile psi(rho) on rho < 1.
double separation_profile(SeparationProfile p, double rho);

using Vec3 = std::array<double, 3>;

struct SeparationQuadrature {
  int dim = 2;
  double radius = 0.0;
  SeparationProfile profile = SeparationProfile::bump;
  int directions = 0;
  int radii = 0;
  std::vector<Vec3> nodes;
  std::vector<double> weights;  // sum to 1
  std::vector<double> radial_nodes;  // unit-ball radii
};

/// Product rule: Gauss radii for rho^{d-1} psi(rho) times a direction rule
/// (equally spaced angles in 2D; Gauss-Legendre in cos(theta) times equally
/// spaced azimuths in 3D). Direction counts default to 32 (2D) and 64 (3D);
/// in 3D the product rule rounds the count up (64 gives 6 x 12 = 72).
/// The node set is symmetric under r -> -r for even direction counts.
/// Throws std::invalid_argument when R < 2h.
SeparationQuadrature make_separation_quadrature(const Grid& g, double radius, SeparationProfile profile,
                                                int directions = 0, int radii = 4);

/// Direction-only rule on the unit sphere/circle (weights sum to 1).
struct DirectionRule {
  std::vector<Vec3> directions;
  std::vector<double> weights;
};
DirectionRule make_direction_rule(int dim, int count);

/// <F>_R for F independent of x.
double separation_average(const std::function<double(const Vec3&)>& f, const SeparationQuadrature& q);

/// <F>_R pointwise in x, given samples[j] = F(., r_j).
PhysicalField separation_average(std::span<const PhysicalField> samples, const SeparationQuadrature& q);

}  // namespace cascade
