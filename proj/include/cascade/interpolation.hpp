// Off-grid evaluation of band-limited fields.
//
// Two schemes: direct Fourier mode summation (exact for the stored
// coefficients, slow) and cubic B-spline interpolation on a grid refined by
// zero-padding. The spline coefficients come from an exact spectral
// prefilter, so the spline interpolates the refined samples and is C2.
#pragma once

#include <span>
#include <string>
#include <vector>

#include "cascade/grid.hpp"
#include "cascade/separation.hpp"

namespace cascade {

enum class InterpolationScheme { spectral, cubic };

std::string to_string(InterpolationScheme s);
InterpolationScheme interpolation_scheme_from_string(const std::string& s);

/// Joint evaluator for a list of fields on a common grid. Components are
/// concatenated in field order; `components()` counts them.
class FieldInterpolant {
 public:
  FieldInterpolant(std::span<const SpectralField> fields, InterpolationScheme scheme, int refine = 1);
  explicit FieldInterpolant(const SpectralField& field, InterpolationScheme scheme = InterpolationScheme::cubic,
                            int refine = 1);

  int components() const { return ncomp_; }
  int dim() const { return grid_.dim; }
  const Grid& grid() const { return grid_; }
  InterpolationScheme scheme() const { return scheme_; }

  /// out[c] for every component. Throws std::invalid_argument on
  /// non-finite positions.
  void evaluate(const Vec3& x, double* out) const;
  /// Values and gradients, grad[i * components() + c] = d_i f_c.
  void evaluate_with_gradient(const Vec3& x, double* value, double* grad) const;

  /// Batch helper: out has x.size() * components() entries.
  void evaluate(std::span<const Vec3> x, std::span<double> out) const;

 private:
  void spectral_eval(const Vec3& x, double* value, double* grad) const;
  void cubic_eval(const Vec3& x, double* value, double* grad) const;

  Grid grid_;
  InterpolationScheme scheme_;
  int refine_ = 1;
  int ncomp_ = 0;
  // spectral: sparse mode list
  std::vector<std::array<int, 3>> modes_;
  std::vector<double> mode_weight_;
  std::vector<Complex> mode_coeff_;  // [mode * ncomp + c]
  // cubic: packed spline coefficients on the refined grid, [node * ncomp + c]
  int nf_ = 0;
  std::vector<double> spline_;
};

/// Convenience: velocities at positions (one Vec3 per position; unused
/// trailing components are zero in 2D).
std::vector<Vec3> interpolate_velocity(const SpectralField& u, std::span<const Vec3> positions,
                                       InterpolationScheme scheme = InterpolationScheme::spectral,
                                       int refine = 1);

}  // namespace cascade
