// Periodic torus [0, 2pi)^d and the two field representations living on it.
#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdlib>
#include <new>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace cascade {

using Complex = std::complex<double>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// 64-byte aligned storage so FFTW new-array execution can run in place on
/// field buffers (every component block is a multiple of 64 bytes).
template <class T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::size_t alignment = 64;

  AlignedAllocator() noexcept = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t count) {
    std::size_t bytes = count * sizeof(T);
    bytes = (bytes + alignment - 1) / alignment * alignment;
    void* p = std::aligned_alloc(alignment, bytes == 0 ? alignment : bytes);
    if (p == nullptr) throw std::bad_alloc();
    return static_cast<T*>(p);
  }
  void deallocate(T* p, std::size_t) noexcept { std::free(p); }

  template <class U>
  bool operator==(const AlignedAllocator<U>&) const noexcept {
    return true;
  }
};

template <class T>
using AlignedVector = std::vector<T, AlignedAllocator<T>>;

/// Uniform grid on the periodic torus of side 2pi.
struct Grid {
  int dim = 2;
  int n = 64;
  double dealias_fraction = 2.0 / 3.0;

  Grid() = default;
  Grid(int dim_, int n_, double dealias = 2.0 / 3.0);

  double spacing() const { return kTwoPi / n; }
  double length() const { return kTwoPi; }
  std::size_t physical_size() const {
    const auto nn = static_cast<std::size_t>(n);
    return dim == 2 ? nn * nn : nn * nn * nn;
  }
  std::size_t spectral_size() const {
    const auto nn = static_cast<std::size_t>(n);
    const auto h = static_cast<std::size_t>(half_n());
    return dim == 2 ? nn * h : nn * nn * h;
  }
  /// Points along the half-stored (last) spectral axis.
  int half_n() const { return n / 2 + 1; }

  /// Integer wavenumber of index i along a full axis, in [-n/2, n/2).
  int wavenumber(int i) const { return i < n / 2 ? i : i - n; }
  /// Modes with any |k_i| above this are removed by dealiasing.
  double dealias_cutoff() const { return dealias_fraction * n / 2.0; }

  /// Wavevector of spectral index `s` (row-major over the r2c layout).
  std::array<int, 3> wavevector(std::size_t s) const {
    std::array<int, 3> k{0, 0, 0};
    const auto h = static_cast<std::size_t>(half_n());
    const auto nn = static_cast<std::size_t>(n);
    const int last = static_cast<int>(s % h);
    k[dim - 1] = last == n / 2 ? -n / 2 : last;
    s /= h;
    if (dim == 3) {
      k[1] = wavenumber(static_cast<int>(s % nn));
      s /= nn;
    }
    k[0] = wavenumber(static_cast<int>(s));
    return k;
  }
  /// Grid coordinates of physical index `p`.
  std::array<double, 3> position(std::size_t p) const;

  /// Multiplicity of a half-stored mode when summing over the full spectrum:
  /// 1 on the k_last = 0 and Nyquist planes, 2 elsewhere.
  double mode_weight(std::size_t s) const {
    const int last = static_cast<int>(s % static_cast<std::size_t>(half_n()));
    return (last == 0 || last == n / 2) ? 1.0 : 2.0;
  }

  bool operator==(const Grid& o) const {
    return dim == o.dim && n == o.n && dealias_fraction == o.dealias_fraction;
  }
};

inline int component_count(int dim, int rank) {
  int c = 1;
  for (int r = 0; r < rank; ++r) c *= dim;
  return c;
}

/// Real-space samples; one contiguous block per component, row-major within.
struct PhysicalField {
  Grid grid;
  int rank = 0;
  AlignedVector<double> values;

  PhysicalField() = default;
  PhysicalField(const Grid& g, int rank_);

  int components() const { return component_count(grid.dim, rank); }
  std::size_t block() const { return grid.physical_size(); }
  std::span<double> component(int c) {
    return {values.data() + c * block(), block()};
  }
  std::span<const double> component(int c) const {
    return {values.data() + c * block(), block()};
  }
  bool all_finite() const;
};

/// Fourier coefficients in r2c layout (last axis stores k >= 0 only).
/// Coefficients are normalised so that the k = 0 entry is the spatial mean.
struct SpectralField {
  Grid grid;
  int rank = 0;
  AlignedVector<Complex> coeffs;

  SpectralField() = default;
  SpectralField(const Grid& g, int rank_);

  int components() const { return component_count(grid.dim, rank); }
  std::size_t block() const { return grid.spectral_size(); }
  std::span<Complex> component(int c) {
    return {coeffs.data() + c * block(), block()};
  }
  std::span<const Complex> component(int c) const {
    return {coeffs.data() + c * block(), block()};
  }

  SpectralField& operator+=(const SpectralField& o);
  SpectralField& operator-=(const SpectralField& o);
  SpectralField& operator*=(double s);
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator-(SpectralField a, const SpectralField& b);
SpectralField operator*(double s, SpectralField a);

/// Extract one component as a rank-0 field, or assemble components.
SpectralField component_field(const SpectralField& f, int c);
PhysicalField component_field(const PhysicalField& f, int c);

/// Spatial mean of a scalar field, summed in index order.
double mean(std::span<const double> values);

/// <a . b> over the torus, computed spectrally (Parseval) for equal-rank
/// fields. Exact for band-limited data.
double spectral_inner(const SpectralField& a, const SpectralField& b);

/// Mean square of all components, <|f|^2>, computed spectrally.
double spectral_mean_square(const SpectralField& f);

void require_same_grid(const Grid& a, const Grid& b, const char* what);

}  // namespace cascade
