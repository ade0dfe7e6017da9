// Real <-> spectral transforms on the torus (FFTW-backed).
//
// The forward transform divides by n^d, so the k = 0 coefficient is the
// spatial mean and inverse_transform needs no scaling. Plans are cached per
// grid shape and shared between threads; creation is serialised.
#pragma once

#include "cascade/grid.hpp"

namespace cascade {

enum class FftRigor { estimate, measure };

/// Planner effort for plans created after the call. `estimate` (the default)
/// gives bit-identical results from run to run.
void set_fft_rigor(FftRigor rigor);

/// Rejects non-finite input.
SpectralField forward_transform(const PhysicalField& f);
PhysicalField inverse_transform(const SpectralField& f);

/// Single-block variants used by hot loops; `out` must be sized for one
/// component and allocated with AlignedAllocator.
void forward_block(const Grid& g, std::span<const double> in, std::span<Complex> out);
void inverse_block(const Grid& g, std::span<const Complex> in, std::span<double> out);

/// Inverse transform onto a grid refined `factor` times per axis by
/// zero-padding the spectrum (exact band-limited prolongation).
PhysicalField inverse_transform_refined(const SpectralField& f, int factor);

}  // namespace cascade
