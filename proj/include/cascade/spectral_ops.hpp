// Spectral calculus on the torus: derivatives, projection, dealiasing and
// pseudo-spectral products.
#pragma once

#include "cascade/grid.hpp"

namespace cascade {

/// out(i, ...) = i k_i f(...): gradient index first. Nyquist wavenumbers
/// carry zero derivative (the mode has no odd real derivative on the grid).
/// Throws std::invalid_argument when rank + 1 > 2.
SpectralField spectral_gradient(const SpectralField& f);

/// Contraction of the first index with i k: rank-1 -> scalar, rank-2 (i,j)
/// -> vector_j = sum_i i k_i f_ij.
SpectralField spectral_divergence(const SpectralField& f);

SpectralField spectral_laplacian(const SpectralField& f);

/// Solenoidal part of a vector field; k = 0 passes through unchanged.
SpectralField leray_project(const SpectralField& u);

/// Zero every mode with some |k_i| > dealias_fraction * n / 2.
SpectralField dealias(const SpectralField& f);
void dealias_in_place(SpectralField& f);
bool is_dealiased_mode(const Grid& g, std::size_t s);

/// Scalar vorticity d1 u2 - d2 u1 (2D) or the curl vector (3D).
SpectralField spectral_curl(const SpectralField& u);

/// 2D Biot-Savart: velocity from scalar vorticity plus a mean flow.
SpectralField velocity_from_vorticity(const SpectralField& omega, double mean_u1, double mean_u2);

/// Dealiased product of two scalar fields: both factors and the result are
/// truncated by the 2/3 rule, so the kept modes are alias-free.
SpectralField dealiased_product(const SpectralField& a, const SpectralField& b);

/// All dim x dim products u_i u_j (dealiased), as a symmetric rank-2 field.
SpectralField dealiased_outer(const SpectralField& u, const SpectralField& v);

/// Largest |div u| over modes, measured spectrally.
double max_spectral_divergence(const SpectralField& u);

/// Multiply every component by a real per-mode factor.
void apply_multiplier(SpectralField& f, std::span<const double> multiplier);

}  // namespace cascade
