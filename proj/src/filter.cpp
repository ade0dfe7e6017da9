#include "cascade/filter.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

#include "cascade/errors.hpp"
#include "cascade/fft.hpp"
#include "cascade/log.hpp"
#include "cascade/quadrature.hpp"
#include "cascade/spectral_ops.hpp"

namespace cascade {

std::string to_string(KernelProfile p) { return p == KernelProfile::bump ? "bump" : "gaussian"; }

KernelProfile kernel_profile_from_string(const std::string& s) {
  if (s == "bump") return KernelProfile::bump;
  if (s == "gaussian") return KernelProfile::gaussian;
  throw std::invalid_argument("unknown kernel profile '" + s + "'");
}

double bump_profile(double rho) {
  if (rho >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - rho * rho));
}

double bump_axis_second_moment(int dim) {
  const QuadratureRule q = gauss_legendre(40, 0.0, 1.0);
  double num = 0.0, den = 0.0;
  // The bump is flat near 0 and vanishes to all orders at 1; split the
  // interval so the panels resolve the edge layer.
  for (int p = 0; p < 32; ++p) {
    const double lo = p / 32.0, w = 1.0 / 32.0;
    for (std::size_t i = 0; i < q.nodes.size(); ++i) {
      const double r = lo + w * q.nodes[i];
      const double b = bump_profile(r) * q.weights[i] * w;
      den += std::pow(r, dim - 1) * b;
      num += std::pow(r, dim + 1) * b;
    }
  }
  return num / den / dim;
}

namespace {

void require_resolved(const Grid& g, double scale, const char* what) {
  if (!(scale >= 2.0 * g.spacing())) {
    throw std::invalid_argument(std::string(what) + ": kernel scale " + std::to_string(scale) +
                                " is below two grid spacings (" + std::to_string(2.0 * g.spacing()) + ")");
  }
}

double min_image(const Grid& g, int i) {
  const int j = i <= g.n / 2 ? i : i - g.n;
  return j * g.spacing();
}

std::vector<double> build_multiplier(const Grid& g, KernelProfile profile, double scale) {
  std::vector<double> mult(g.spectral_size());
  if (profile == KernelProfile::gaussian) {
    const double sigma2 = bump_axis_second_moment(g.dim) * scale * scale;
    for (std::size_t s = 0; s < mult.size(); ++s) {
      const auto k = g.wavevector(s);
      const double k2 = double(k[0]) * k[0] + double(k[1]) * k[1] + double(k[2]) * k[2];
      mult[s] = std::exp(-0.5 * sigma2 * k2);
    }
    mult[0] = 1.0;
    return mult;
  }
  const std::vector<double> w = sampled_kernel_weights(g, scale);
  AlignedVector<double> buf(w.begin(), w.end());
  AlignedVector<Complex> spec(g.spectral_size());
  forward_block(g, buf, spec);
  const double n = static_cast<double>(g.physical_size());
  for (std::size_t s = 0; s < mult.size(); ++s) mult[s] = spec[s].real() * n;
  mult[0] = 1.0;
  return mult;
}

}  // namespace

std::vector<double> sampled_kernel_weights(const Grid& g, double scale) {
  require_resolved(g, scale, "sampled_kernel_weights");
  std::vector<double> w(g.physical_size());
  const int n = g.n;
  double total = 0.0;
  for (std::size_t p = 0; p < w.size(); ++p) {
    std::size_t rest = p;
    double r2 = 0.0;
    for (int d = 0; d < g.dim; ++d) {
      const double x = min_image(g, static_cast<int>(rest % n));
      rest /= n;
      r2 += x * x;
    }
    w[p] = bump_profile(std::sqrt(r2) / scale);
    total += w[p];
  }
  for (auto& v : w) v /= total;
  return w;
}

FilterKernel make_filter_kernel(const Grid& g, KernelProfile profile, double scale) {
  require_resolved(g, scale, "make_filter_kernel");
  using Key = std::tuple<int, int, double, int, double>;
  static std::mutex mutex;
  static std::map<Key, std::shared_ptr<const std::vector<double>>> cache;
  const Key key{g.dim, g.n, g.dealias_fraction, static_cast<int>(profile), scale};
  FilterKernel k{g, profile, scale, nullptr};
  {
    std::lock_guard lock(mutex);
    auto it = cache.find(key);
    if (it != cache.end()) {
      k.multiplier = it->second;
      return k;
    }
  }
  auto mult = std::make_shared<const std::vector<double>>(build_multiplier(g, profile, scale));
  std::lock_guard lock(mutex);
  auto [it, inserted] = cache.emplace(key, mult);
  k.multiplier = it->second;
  return k;
}

SpectralField mollify(const SpectralField& f, const FilterKernel& k) {
  require_same_grid(f.grid, k.grid, "mollify");
  SpectralField out = f;
  apply_multiplier(out, *k.multiplier);
  return out;
}

PhysicalField mollify(const PhysicalField& f, const FilterKernel& k) {
  return inverse_transform(mollify(forward_transform(f), k));
}

SpectralField subfilter_stress(const SpectralField& u, const FilterKernel& k) {
  if (u.rank != 1) throw std::invalid_argument("subfilter_stress: needs a vector field");
  require_same_grid(u.grid, k.grid, "subfilter_stress");
  const double div = max_spectral_divergence(u);
  const double size = std::sqrt(spectral_mean_square(u));
  if (div > 1e-10 * std::max(size, 1.0)) {
    warn("subfilter_stress: input is not divergence free (max |k.u| = " + std::to_string(div) + ")");
  }
  SpectralField ub = mollify(u, k);
  SpectralField tau = mollify(dealiased_outer(u, u), k);
  tau -= dealiased_outer(ub, ub);
  return tau;
}

PhysicalField flux_pi(const SpectralField& u, const FilterKernel& k) {
  const Grid& g = u.grid;
  const int d = g.dim;
  PhysicalField tau = inverse_transform(subfilter_stress(u, k));
  PhysicalField grad = inverse_transform(spectral_gradient(mollify(u, k)));
  PhysicalField pi(g, 0);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      auto a = grad.component(i * d + j);
      auto t = tau.component(i * d + j);
      for (std::size_t p = 0; p < pi.values.size(); ++p) pi.values[p] -= a[p] * t[p];
    }
  }
  return pi;
}

double mean_flux(const SpectralField& u, const FilterKernel& k) { return mean(flux_pi(u, k).values); }

namespace {

void require_forcing(const FlowState& s) {
  if (s.f.coeffs.empty() || !(s.f.grid == s.grid)) {
    throw MissingData("flow state carries no forcing field for this grid");
  }
}

// sum_i a_i d_i b_j, pointwise.
PhysicalField advect_pointwise(const PhysicalField& a, const PhysicalField& grad_b) {
  const int d = a.grid.dim;
  PhysicalField out(a.grid, 1);
  for (int j = 0; j < d; ++j) {
    auto o = out.component(j);
    for (int i = 0; i < d; ++i) {
      auto ai = a.component(i);
      auto g = grad_b.component(i * d + j);
      for (std::size_t p = 0; p < o.size(); ++p) o[p] += ai[p] * g[p];
    }
  }
  return out;
}

SpectralField friction_force(const SpectralField& u, double mu) {
  SpectralField out(u.grid, 1);
  if (mu == 0.0) return out;
  for (std::size_t s = 0; s < u.block(); ++s) {
    const auto k = u.grid.wavevector(s);
    const double k2 = double(k[0]) * k[0] + double(k[1]) * k[1] + double(k[2]) * k[2];
    if (k2 > 0.0 && k2 <= 4.0) {
      for (int c = 0; c < u.grid.dim; ++c) out.component(c)[s] = -mu * u.component(c)[s];
    }
  }
  return out;
}

}  // namespace

SpectralField filtered_tendency(const FlowState& s, const FilterKernel& k) {
  require_forcing(s);
  return mollify(velocity_tendency(s.u, s.f, s.nu, s.friction), k);
}

PhysicalField filtered_acceleration(const FlowState& s, const FilterKernel& k) {
  PhysicalField a = inverse_transform(filtered_tendency(s, k));
  const SpectralField ub = mollify(s.u, k);
  PhysicalField adv = advect_pointwise(inverse_transform(ub), inverse_transform(spectral_gradient(ub)));
  for (std::size_t p = 0; p < a.values.size(); ++p) a.values[p] += adv.values[p];
  return a;
}

PhysicalField filtered_acceleration_terms(const FlowState& s, const FilterKernel& k) {
  require_forcing(s);
  const SpectralField ub = mollify(s.u, k);
  SpectralField sum = spectral_divergence(subfilter_stress(s.u, k));
  sum *= -1.0;
  sum -= spectral_gradient(mollify(pressure(s.u), k));
  SpectralField visc = spectral_laplacian(ub);
  visc *= s.nu;
  sum += visc;
  sum += mollify(leray_project(s.f), k);
  sum += mollify(friction_force(s.u, s.friction), k);
  sum -= spectral_divergence(dealiased_outer(ub, ub));
  PhysicalField a = inverse_transform(sum);
  PhysicalField adv = advect_pointwise(inverse_transform(ub), inverse_transform(spectral_gradient(ub)));
  for (std::size_t p = 0; p < a.values.size(); ++p) a.values[p] += adv.values[p];
  return a;
}

BudgetTerms resolved_budget(const FlowState& s, const FilterKernel& k) {
  require_forcing(s);
  const Grid& g = s.grid;
  const int d = g.dim;
  const std::size_t np = g.physical_size();
  const SpectralField ub_s = mollify(s.u, k);
  const PhysicalField ub = inverse_transform(ub_s);
  const PhysicalField dub = inverse_transform(filtered_tendency(s, k));
  const PhysicalField grad = inverse_transform(spectral_gradient(ub_s));
  const PhysicalField tau = inverse_transform(subfilter_stress(s.u, k));
  const PhysicalField pbar = inverse_transform(mollify(pressure(s.u), k));
  const PhysicalField fbar = inverse_transform(mollify(leray_project(s.f), k));
  const PhysicalField fric = inverse_transform(mollify(friction_force(s.u, s.friction), k));

  BudgetTerms b{PhysicalField(g, 0), PhysicalField(g, 0), PhysicalField(g, 0), PhysicalField(g, 0),
                PhysicalField(g, 0), PhysicalField(g, 0), PhysicalField(g, 0)};
  PhysicalField flux(g, 1);
  for (std::size_t p = 0; p < np; ++p) {
    double e = 0.0;
    for (int i = 0; i < d; ++i) e += 0.5 * ub.component(i)[p] * ub.component(i)[p];
    double pi = 0.0, visc = 0.0;
    for (int i = 0; i < d; ++i) {
      b.energy_rate.values[p] += ub.component(i)[p] * dub.component(i)[p];
      b.forcing_work.values[p] += ub.component(i)[p] * fbar.component(i)[p];
      b.friction.values[p] += ub.component(i)[p] * fric.component(i)[p];
      for (int j = 0; j < d; ++j) {
        const double gij = grad.component(i * d + j)[p];
        pi -= gij * tau.component(i * d + j)[p];
        visc += gij * gij;
      }
    }
    b.flux.values[p] = pi;
    b.viscous.values[p] = s.nu * visc;
    for (int j = 0; j < d; ++j) {
      double jj = ub.component(j)[p] * (e + pbar.values[p]);
      double grad_e = 0.0;
      for (int i = 0; i < d; ++i) {
        jj += tau.component(i * d + j)[p] * ub.component(i)[p];
        grad_e += ub.component(i)[p] * grad.component(j * d + i)[p];
      }
      flux.component(j)[p] = jj - s.nu * grad_e;
    }
  }
  b.transport = inverse_transform(spectral_divergence(forward_transform(flux)));
  double rss = 0.0;
  for (std::size_t p = 0; p < np; ++p) {
    const double r = b.energy_rate.values[p] + b.transport.values[p] + b.flux.values[p] -
                     b.forcing_work.values[p] + b.viscous.values[p] - b.friction.values[p];
    b.residual.values[p] = r;
    rss += r * r;
  }
  b.mean_energy_rate = mean(b.energy_rate.values);
  b.mean_transport = mean(b.transport.values);
  b.mean_flux = mean(b.flux.values);
  b.mean_forcing_work = mean(b.forcing_work.values);
  b.mean_viscous = mean(b.viscous.values);
  b.mean_friction = mean(b.friction.values);
  b.mean_residual = mean(b.residual.values);
  b.residual_rms = std::sqrt(rss / static_cast<double>(np));
  b.resolved_energy = 0.5 * spectral_mean_square(ub_s);
  return b;
}

}  // namespace cascade
