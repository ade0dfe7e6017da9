#include "cascade/diagnostics.hpp"

#include <cmath>
#include <stdexcept>

#include "cascade/fft.hpp"
#include "cascade/log.hpp"
#include "cascade/tracers.hpp"

namespace cascade {

double SpectrumSeries::total() const {
  double s = 0.0;
  for (double e : energy) s += e;
  return s;
}

SpectrumSeries energy_spectrum(const SpectralField& u, double t) {
  const Grid& g = u.grid;
  SpectrumSeries out;
  out.t = t;
  const int shells = static_cast<int>(std::ceil(std::sqrt(double(g.dim)) * (g.n / 2))) + 1;
  out.energy.assign(static_cast<std::size_t>(shells), 0.0);
  for (int s = 0; s < shells; ++s) out.k.push_back(s);
  for (std::size_t s = 0; s < g.spectral_size(); ++s) {
    const auto k = g.wavevector(s);
    const double kk = std::sqrt(double(k[0]) * k[0] + double(k[1]) * k[1] + double(k[2]) * k[2]);
    double e = 0.0;
    for (int c = 0; c < u.components(); ++c) e += std::norm(u.component(c)[s]);
    out.energy[static_cast<std::size_t>(std::lround(kk))] += 0.5 * g.mode_weight(s) * e;
  }
  return out;
}

double spectrum_slope(const SpectrumSeries& s, double kmin, double kmax) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int m = 0;
  for (std::size_t i = 0; i < s.k.size(); ++i) {
    if (s.k[i] < kmin || s.k[i] > kmax || !(s.energy[i] > 0.0)) continue;
    const double x = std::log(s.k[i]), y = std::log(s.energy[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  if (m < 2) throw std::invalid_argument("spectrum_slope: fewer than two nonempty shells in range");
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

SpectralField shift_field(const SpectralField& f, const Vec3& r) {
  const Grid& g = f.grid;
  SpectralField out = f;
  const int nyq = g.n / 2;
  for (std::size_t s = 0; s < g.spectral_size(); ++s) {
    const auto k = g.wavevector(s);
    Complex phase{1.0, 0.0};
    for (int i = 0; i < g.dim; ++i) {
      const double kr = k[i] * r[i];
      phase *= std::abs(k[i]) == nyq ? Complex{std::cos(kr), 0.0} : Complex{std::cos(kr), std::sin(kr)};
    }
    for (int c = 0; c < f.components(); ++c) out.component(c)[s] *= phase;
  }
  return out;
}

double structure_function_2(const SpectralField& u, const Vec3& r) {
  const Grid& g = u.grid;
  const int nyq = g.n / 2;
  double total = 0.0;
  for (std::size_t s = 0; s < g.spectral_size(); ++s) {
    double e = 0.0;
    for (int c = 0; c < u.components(); ++c) e += std::norm(u.component(c)[s]);
    if (e == 0.0) continue;
    const auto k = g.wavevector(s);
    Complex phase{1.0, 0.0};
    for (int i = 0; i < g.dim; ++i) {
      const double kr = k[i] * r[i];
      phase *= std::abs(k[i]) == nyq ? Complex{std::cos(kr), 0.0} : Complex{std::cos(kr), std::sin(kr)};
    }
    total += g.mode_weight(s) * e * std::norm(phase - 1.0);
  }
  return total;
}

std::vector<double> structure_function_2(const SpectralField& u, std::span<const Vec3> r) {
  std::vector<double> out;
  out.reserve(r.size());
  for (const auto& v : r) out.push_back(structure_function_2(u, v));
  return out;
}

std::vector<double> structure_function_3L(const SpectralField& u, std::span<const double> r, int directions) {
  const Grid& g = u.grid;
  if (u.rank != 1) throw std::invalid_argument("structure_function_3L: needs a vector field");
  const auto rule = make_direction_rule(g.dim, directions > 0 ? directions : (g.dim == 2 ? 32 : 64));
  std::vector<double> out(r.size(), 0.0);
  SpectralField q(g, 0);
  for (std::size_t j = 0; j < rule.directions.size(); ++j) {
    const Vec3& e = rule.directions[j];
    for (std::size_t s = 0; s < g.spectral_size(); ++s) {
      Complex v{0.0, 0.0};
      for (int c = 0; c < g.dim; ++c) v += e[c] * u.component(c)[s];
      q.coeffs[s] = v;
    }
    const PhysicalField q0 = inverse_transform(q);
    for (std::size_t m = 0; m < r.size(); ++m) {
      if (!(r[m] > 0.0)) throw std::invalid_argument("structure_function_3L: magnitudes must be positive");
      const PhysicalField q1 = inverse_transform(shift_field(q, Vec3{e[0] * r[m], e[1] * r[m], e[2] * r[m]}));
      double s3 = 0.0;
      for (std::size_t p = 0; p < q0.values.size(); ++p) {
        const double d = q1.values[p] - q0.values[p];
        s3 += d * d * d;
      }
      out[m] += rule.weights[j] * s3 / static_cast<double>(q0.values.size()) / r[m];
    }
  }
  return out;
}

double four_fifths_coefficient(int dim) { return -12.0 / static_cast<double>(dim * (dim + 2)); }

FourFifthsTable four_fifths_check(const SpectralField& u, std::span<const double> r, KernelProfile profile,
                                  int directions, double floor) {
  FourFifthsTable t;
  t.dim = u.grid.dim;
  t.coefficient = four_fifths_coefficient(t.dim);
  t.floor = floor;
  const auto s3 = structure_function_3L(u, r, directions);
  for (std::size_t m = 0; m < r.size(); ++m) {
    FourFifthsRow row;
    row.r = r[m];
    row.s3l = s3[m];
    row.mean_flux = mean_flux(u, make_filter_kernel(u.grid, profile, r[m]));
    row.predicted = t.coefficient * row.mean_flux;
    row.indeterminate = std::abs(row.s3l) < floor && std::abs(row.predicted) < floor;
    row.ratio = row.indeterminate || row.predicted == 0.0 ? NAN : row.s3l / row.predicted;
    t.rows.push_back(row);
  }
  return t;
}

FluxProfile flux_profile(const FlowState& s, std::span<const double> ell, KernelProfile profile) {
  FluxProfile out;
  for (std::size_t i = 0; i < ell.size(); ++i) {
    if (i > 0 && !(ell[i] > ell[i - 1])) throw std::invalid_argument("flux_profile: scales must increase strictly");
    const auto k = make_filter_kernel(s.grid, profile, ell[i]);
    out.ell.push_back(ell[i]);
    out.mean_flux.push_back(mean_flux(s.u, k));
    out.turnover.push_back(turnover_time(mollify(s.u, k), ell[i]));
  }
  out.dissipation = dissipation_rate(s.u, s.nu).mean;
  out.input = s.f.coeffs.empty() ? 0.0 : energy_input_rate(s.u, s.f).mean;
  return out;
}

ScaleReport scale_report(const FlowState& s, std::span<const double> ell, double radius) {
  ScaleReport rep;
  const Grid& g = s.grid;
  rep.energy = kinetic_energy(s.u);
  rep.dissipation = dissipation_rate(s.u, s.nu).mean;
  if (s.nu > 0.0 && rep.dissipation > 0.0) {
    rep.kolmogorov_length = std::pow(s.nu * s.nu * s.nu / rep.dissipation, 0.25);
    rep.kolmogorov_time = std::sqrt(s.nu / rep.dissipation);
  }
  const auto spec = energy_spectrum(s.u, s.t);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 1; i < spec.k.size(); ++i) {
    num += spec.k[i] * spec.energy[i];
    den += spec.energy[i];
  }
  rep.integral_scale = num > 0.0 ? g.length() / (num / den) : 0.0;
  rep.rms_velocity = std::sqrt(2.0 * (rep.energy - spec.energy[0]) / g.dim);
  if (s.nu > 0.0) rep.reynolds = rep.rms_velocity * rep.integral_scale / s.nu;

  auto flag = [&](const std::string& msg) {
    rep.warnings.push_back(msg);
    warn("scale ordering: " + msg);
  };
  if (!ell.empty()) {
    double lo = ell[0], hi = ell[0];
    for (double l : ell) {
      lo = std::min(lo, l);
      hi = std::max(hi, l);
    }
    if (!(g.spacing() < lo)) flag("smallest filter scale does not exceed the grid spacing");
    if (rep.kolmogorov_length && !(*rep.kolmogorov_length < lo)) {
      flag("dissipation length " + std::to_string(*rep.kolmogorov_length) + " is not below the smallest filter scale");
    }
    if (radius > 0.0) {
      if (!(hi < radius)) flag("largest filter scale is not below the averaging radius");
      if (!(radius < rep.integral_scale / 2.0)) flag("averaging radius is not below half the integral scale");
    }
  }
  return rep;
}

}  // namespace cascade
