// Shared helpers for the test suites: seeded random fields and brute-force
// reference computations.
#pragma once

#include <cmath>
#include <complex>
#include <random>

#include "cascade/fft.hpp"
#include "cascade/grid.hpp"
#include "cascade/spectral_ops.hpp"

namespace testing_support {

using cascade::Complex;
using cascade::Grid;
using cascade::PhysicalField;
using cascade::SpectralField;

inline PhysicalField random_physical(const Grid& g, int rank, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  PhysicalField f(g, rank);
  for (auto& v : f.values) v = dist(rng);
  return f;
}

// Random field with every |k_i| <= kmax, real by construction.
inline SpectralField random_band_limited(const Grid& g, int rank, int kmax, unsigned seed,
                                         double slope = 0.0) {
  PhysicalField f = random_physical(g, rank, seed);
  SpectralField s = cascade::forward_transform(f);
  auto truncate = [&](SpectralField& t, bool shape) {
    for (int c = 0; c < t.components(); ++c) {
      auto blk = t.component(c);
      for (std::size_t i = 0; i < blk.size(); ++i) {
        const auto k = g.wavevector(i);
        bool keep = true;
        double k2 = 0.0;
        for (int d = 0; d < g.dim; ++d) {
          if (std::abs(k[d]) > kmax || k[d] == -g.n / 2) keep = false;
          k2 += double(k[d]) * k[d];
        }
        if (!keep) {
          blk[i] = 0.0;
        } else if (shape && slope != 0.0 && k2 > 0.0) {
          blk[i] *= std::pow(k2, slope / 2.0);
        }
      }
    }
  };
  truncate(s, true);
  // Round trip enforces Hermitian symmetry on the self-conjugate planes; the
  // second truncation clears the roundoff it leaves outside the band.
  s = cascade::forward_transform(cascade::inverse_transform(s));
  truncate(s, false);
  return s;
}

inline SpectralField random_solenoidal(const Grid& g, int kmax, unsigned seed, double slope = 0.0) {
  return cascade::leray_project(random_band_limited(g, 1, kmax, seed, slope));
}

// Evaluate a scalar spectral field at an arbitrary point by summing modes.
inline double evaluate_at(const SpectralField& f, int c, const double* x) {
  const Grid& g = f.grid;
  auto blk = f.component(c);
  double v = 0.0;
  for (std::size_t s = 0; s < blk.size(); ++s) {
    const auto k = g.wavevector(s);
    double phase = 0.0;
    for (int d = 0; d < g.dim; ++d) phase += k[d] * x[d];
    // Weight 1 on self-conjugate planes, where Re() already pairs +-k.
    v += g.mode_weight(s) * (blk[s] * Complex{std::cos(phase), std::sin(phase)}).real();
  }
  return v;
}

inline double max_abs_diff(const PhysicalField& a, const PhysicalField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) m = std::max(m, std::abs(a.values[i] - b.values[i]));
  return m;
}

inline double max_abs(const PhysicalField& a) {
  double m = 0.0;
  for (double v : a.values) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace testing_support
