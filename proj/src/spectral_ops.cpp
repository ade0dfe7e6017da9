#include "cascade/spectral_ops.hpp"

#include <cmath>

#include "cascade/fft.hpp"

namespace cascade {
namespace {

// Derivative wavenumber: Nyquist gets zero.
double dk(const Grid& g, int k) { return k == -g.n / 2 ? 0.0 : static_cast<double>(k); }

}  // namespace

SpectralField spectral_gradient(const SpectralField& f) {
  if (f.rank + 1 > 2) throw std::invalid_argument("spectral_gradient: rank overflow");
  const Grid& g = f.grid;
  SpectralField out(g, f.rank + 1);
  const int nin = f.components();
  const std::size_t blk = f.block();
  for (int i = 0; i < g.dim; ++i) {
    for (int c = 0; c < nin; ++c) {
      auto src = f.component(c);
      auto dst = out.component(i * nin + c);
      for (std::size_t s = 0; s < blk; ++s) {
        const double k = dk(g, g.wavevector(s)[i]);
        dst[s] = Complex{-k * src[s].imag(), k * src[s].real()};
      }
    }
  }
  return out;
}

SpectralField spectral_divergence(const SpectralField& f) {
  if (f.rank < 1) throw std::invalid_argument("spectral_divergence: needs rank >= 1");
  const Grid& g = f.grid;
  SpectralField out(g, f.rank - 1);
  const int nout = out.components();
  const std::size_t blk = f.block();
  for (int i = 0; i < g.dim; ++i) {
    for (int c = 0; c < nout; ++c) {
      auto src = f.component(i * nout + c);
      auto dst = out.component(c);
      for (std::size_t s = 0; s < blk; ++s) {
        const double k = dk(g, g.wavevector(s)[i]);
        dst[s] += Complex{-k * src[s].imag(), k * src[s].real()};
      }
    }
  }
  return out;
}

SpectralField spectral_laplacian(const SpectralField& f) {
  SpectralField out = f;
  const Grid& g = f.grid;
  const std::size_t blk = f.block();
  for (std::size_t s = 0; s < blk; ++s) {
    const auto k = g.wavevector(s);
    const double k2 = double(k[0]) * k[0] + double(k[1]) * k[1] + double(k[2]) * k[2];
    for (int c = 0; c < f.components(); ++c) out.component(c)[s] *= -k2;
  }
  return out;
}

SpectralField leray_project(const SpectralField& u) {
  if (u.rank != 1) throw std::invalid_argument("leray_project: needs a vector field");
  const Grid& g = u.grid;
  SpectralField out = u;
  const std::size_t blk = u.block();
  for (std::size_t s = 0; s < blk; ++s) {
    const auto kv = g.wavevector(s);
    double k[3];
    double k2 = 0.0;
    for (int i = 0; i < g.dim; ++i) {
      k[i] = dk(g, kv[i]);
      k2 += k[i] * k[i];
    }
    if (k2 == 0.0) continue;
    Complex kdotu{0.0, 0.0};
    for (int i = 0; i < g.dim; ++i) kdotu += k[i] * u.component(i)[s];
    for (int i = 0; i < g.dim; ++i) out.component(i)[s] -= k[i] * kdotu / k2;
  }
  return out;
}

bool is_dealiased_mode(const Grid& g, std::size_t s) {
  const auto k = g.wavevector(s);
  const double cut = g.dealias_cutoff();
  for (int i = 0; i < g.dim; ++i) {
    if (std::abs(static_cast<double>(k[i])) > cut) return false;
  }
  return true;
}

void dealias_in_place(SpectralField& f) {
  const std::size_t blk = f.block();
  for (std::size_t s = 0; s < blk; ++s) {
    if (is_dealiased_mode(f.grid, s)) continue;
    for (int c = 0; c < f.components(); ++c) f.component(c)[s] = Complex{0.0, 0.0};
  }
}

SpectralField dealias(const SpectralField& f) {
  SpectralField out = f;
  dealias_in_place(out);
  return out;
}

SpectralField spectral_curl(const SpectralField& u) {
  if (u.rank != 1) throw std::invalid_argument("spectral_curl: needs a vector field");
  const Grid& g = u.grid;
  const std::size_t blk = u.block();
  auto ik = [&](int axis, std::size_t s, Complex v) {
    const double k = dk(g, g.wavevector(s)[axis]);
    return Complex{-k * v.imag(), k * v.real()};
  };
  if (g.dim == 2) {
    SpectralField w(g, 0);
    for (std::size_t s = 0; s < blk; ++s) {
      w.coeffs[s] = ik(0, s, u.component(1)[s]) - ik(1, s, u.component(0)[s]);
    }
    return w;
  }
  SpectralField w(g, 1);
  for (std::size_t s = 0; s < blk; ++s) {
    const Complex u0 = u.component(0)[s], u1 = u.component(1)[s], u2 = u.component(2)[s];
    w.component(0)[s] = ik(1, s, u2) - ik(2, s, u1);
    w.component(1)[s] = ik(2, s, u0) - ik(0, s, u2);
    w.component(2)[s] = ik(0, s, u1) - ik(1, s, u0);
  }
  return w;
}

SpectralField velocity_from_vorticity(const SpectralField& omega, double mean_u1, double mean_u2) {
  const Grid& g = omega.grid;
  if (g.dim != 2 || omega.rank != 0) {
    throw std::invalid_argument("velocity_from_vorticity: needs a 2D scalar vorticity");
  }
  SpectralField u(g, 1);
  const std::size_t blk = omega.block();
  for (std::size_t s = 0; s < blk; ++s) {
    const auto kv = g.wavevector(s);
    const double k1 = dk(g, kv[0]);
    const double k2 = dk(g, kv[1]);
    const double kk = double(kv[0]) * kv[0] + double(kv[1]) * kv[1];
    if (kk == 0.0) continue;
    // psi = omega / |k|^2, u = (d2 psi, -d1 psi)
    const Complex psi = omega.coeffs[s] / kk;
    u.component(0)[s] = Complex{-k2 * psi.imag(), k2 * psi.real()};
    u.component(1)[s] = -Complex{-k1 * psi.imag(), k1 * psi.real()};
  }
  u.component(0)[0] = mean_u1;
  u.component(1)[0] = mean_u2;
  return u;
}

SpectralField dealiased_product(const SpectralField& a, const SpectralField& b) {
  require_same_grid(a.grid, b.grid, "dealiased_product");
  if (a.rank != 0 || b.rank != 0) throw std::invalid_argument("dealiased_product: scalars only");
  const Grid& g = a.grid;
  PhysicalField pa = inverse_transform(dealias(a));
  PhysicalField pb = inverse_transform(dealias(b));
  for (std::size_t i = 0; i < pa.values.size(); ++i) pa.values[i] *= pb.values[i];
  SpectralField out(g, 0);
  forward_block(g, pa.values, out.coeffs);
  dealias_in_place(out);
  return out;
}

SpectralField dealiased_outer(const SpectralField& u, const SpectralField& v) {
  require_same_grid(u.grid, v.grid, "dealiased_outer");
  if (u.rank != 1 || v.rank != 1) throw std::invalid_argument("dealiased_outer: vectors only");
  const Grid& g = u.grid;
  const int d = g.dim;
  PhysicalField pu = inverse_transform(dealias(u));
  PhysicalField pv = (&u == &v) ? pu : inverse_transform(dealias(v));
  SpectralField out(g, 2);
  PhysicalField prod(g, 0);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      auto a = pu.component(i);
      auto b = pv.component(j);
      for (std::size_t p = 0; p < a.size(); ++p) prod.values[p] = a[p] * b[p];
      forward_block(g, prod.values, out.component(i * d + j));
    }
  }
  dealias_in_place(out);
  return out;
}

double max_spectral_divergence(const SpectralField& u) {
  SpectralField div = spectral_divergence(u);
  double m = 0.0;
  for (const auto& c : div.coeffs) m = std::max(m, std::abs(c));
  return m;
}

void apply_multiplier(SpectralField& f, std::span<const double> multiplier) {
  if (multiplier.size() != f.block()) throw std::invalid_argument("apply_multiplier: size mismatch");
  for (int c = 0; c < f.components(); ++c) {
    auto blk = f.component(c);
    for (std::size_t s = 0; s < blk.size(); ++s) blk[s] *= multiplier[s];
  }
}

}  // namespace cascade
