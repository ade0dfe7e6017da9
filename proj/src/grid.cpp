#include "cascade/grid.hpp"

#include <cmath>
#include <string>

namespace cascade {

Grid::Grid(int dim_, int n_, double dealias) : dim(dim_), n(n_), dealias_fraction(dealias) {
  if (dim != 2 && dim != 3) {
    throw std::invalid_argument("grid dimension must be 2 or 3, got " + std::to_string(dim));
  }
  if (n < 8 || n % 2 != 0) {
    throw std::invalid_argument("grid points per axis must be even and >= 8, got " +
                                std::to_string(n));
  }
  if (!(dealias > 0.0 && dealias <= 1.0)) {
    throw std::invalid_argument("dealias fraction must lie in (0, 1]");
  }
}

std::array<double, 3> Grid::position(std::size_t p) const {
  std::array<double, 3> x{0.0, 0.0, 0.0};
  const auto nn = static_cast<std::size_t>(n);
  for (int d = dim - 1; d >= 0; --d) {
    x[d] = static_cast<double>(p % nn) * spacing();
    p /= nn;
  }
  return x;
}

PhysicalField::PhysicalField(const Grid& g, int rank_)
    : grid(g), rank(rank_), values(static_cast<std::size_t>(component_count(g.dim, rank_)) *
                                       g.physical_size(),
                                   0.0) {
  if (rank_ < 0 || rank_ > 2) throw std::invalid_argument("field rank must be 0, 1 or 2");
}

bool PhysicalField::all_finite() const {
  for (double v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

SpectralField::SpectralField(const Grid& g, int rank_)
    : grid(g), rank(rank_), coeffs(static_cast<std::size_t>(component_count(g.dim, rank_)) *
                                       g.spectral_size(),
                                   Complex{0.0, 0.0}) {
  if (rank_ < 0 || rank_ > 2) throw std::invalid_argument("field rank must be 0, 1 or 2");
}

void require_same_grid(const Grid& a, const Grid& b, const char* what) {
  if (!(a == b)) throw std::invalid_argument(std::string(what) + ": grid mismatch");
}

SpectralField& SpectralField::operator+=(const SpectralField& o) {
  require_same_grid(grid, o.grid, "spectral +=");
  if (rank != o.rank) throw std::invalid_argument("spectral +=: rank mismatch");
  for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] += o.coeffs[i];
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& o) {
  require_same_grid(grid, o.grid, "spectral -=");
  if (rank != o.rank) throw std::invalid_argument("spectral -=: rank mismatch");
  for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] -= o.coeffs[i];
  return *this;
}

SpectralField& SpectralField::operator*=(double s) {
  for (auto& c : coeffs) c *= s;
  return *this;
}

SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
SpectralField operator*(double s, SpectralField a) { return a *= s; }

SpectralField component_field(const SpectralField& f, int c) {
  SpectralField out(f.grid, 0);
  auto src = f.component(c);
  std::copy(src.begin(), src.end(), out.coeffs.begin());
  return out;
}

PhysicalField component_field(const PhysicalField& f, int c) {
  PhysicalField out(f.grid, 0);
  auto src = f.component(c);
  std::copy(src.begin(), src.end(), out.values.begin());
  return out;
}

double mean(std::span<const double> values) {
  double s = 0.0;
  for (double v : values) s += v;
  return values.empty() ? 0.0 : s / static_cast<double>(values.size());
}

double spectral_inner(const SpectralField& a, const SpectralField& b) {
  require_same_grid(a.grid, b.grid, "spectral_inner");
  if (a.rank != b.rank) throw std::invalid_argument("spectral_inner: rank mismatch");
  const std::size_t blk = a.block();
  double total = 0.0;
  for (int c = 0; c < a.components(); ++c) {
    auto x = a.component(c);
    auto y = b.component(c);
    double s = 0.0;
    for (std::size_t i = 0; i < blk; ++i) {
      s += a.grid.mode_weight(i) * (x[i].real() * y[i].real() + x[i].imag() * y[i].imag());
    }
    total += s;
  }
  return total;
}

double spectral_mean_square(const SpectralField& f) { return spectral_inner(f, f); }

}  // namespace cascade
