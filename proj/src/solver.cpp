#include "cascade/solver.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "cascade/errors.hpp"
#include "cascade/fft.hpp"
#include "cascade/spectral_ops.hpp"

namespace cascade {

FlowState::FlowState(const Grid& g, double nu_, double friction_)
    : grid(g), u(g, 1), f(g, 1), nu(nu_), friction(friction_) {
  if (nu_ < 0.0) throw std::invalid_argument("viscosity must be >= 0");
  if (friction_ < 0.0) throw std::invalid_argument("friction must be >= 0");
}

namespace {

double k_squared(const Grid& g, std::size_t s) {
  const auto k = g.wavevector(s);
  return double(k[0]) * k[0] + double(k[1]) * k[1] + double(k[2]) * k[2];
}

double damping_rate(const Grid& g, std::size_t s, double nu, double friction) {
  const double k2 = k_squared(g, s);
  double l = nu * k2;
  if (friction > 0.0 && k2 > 0.0 && k2 <= 4.0) l += friction;
  return l;
}

// -d_j (u_i u_j) for i <= j products, dealiased, no projection.
SpectralField divergence_of_products(const SpectralField& u) {
  const Grid& g = u.grid;
  const int d = g.dim;
  PhysicalField pu = inverse_transform(dealias(u));
  SpectralField prod(g, 2);
  AlignedVector<double> buf(g.physical_size());
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      auto a = pu.component(i);
      auto b = pu.component(j);
      for (std::size_t p = 0; p < buf.size(); ++p) buf[p] = a[p] * b[p];
      forward_block(g, buf, prod.component(i * d + j));
      if (i != j) {
        auto src = prod.component(i * d + j);
        auto dst = prod.component(j * d + i);
        std::copy(src.begin(), src.end(), dst.begin());
      }
    }
  }
  dealias_in_place(prod);
  SpectralField div = spectral_divergence(prod);
  div *= -1.0;
  return div;
}

// Vorticity advection u.grad w, via
// u.grad w = d1 d2 (u2^2 - u1^2) + (d1^2 - d2^2)(u1 u2).
SpectralField vorticity_advection(const SpectralField& u) {
  const Grid& g = u.grid;
  PhysicalField pu = inverse_transform(dealias(u));
  auto a = pu.component(0);
  auto b = pu.component(1);
  AlignedVector<double> buf(g.physical_size());
  SpectralField diff(g, 0), cross(g, 0);
  for (std::size_t p = 0; p < buf.size(); ++p) buf[p] = b[p] * b[p] - a[p] * a[p];
  forward_block(g, buf, diff.coeffs);
  for (std::size_t p = 0; p < buf.size(); ++p) buf[p] = a[p] * b[p];
  forward_block(g, buf, cross.coeffs);
  SpectralField out(g, 0);
  for (std::size_t s = 0; s < out.coeffs.size(); ++s) {
    if (!is_dealiased_mode(g, s)) continue;
    const auto k = g.wavevector(s);
    const double k1 = k[0], k2 = k[1];
    out.coeffs[s] = -k1 * k2 * diff.coeffs[s] - (k1 * k1 - k2 * k2) * cross.coeffs[s];
  }
  return out;
}

struct Factors {
  AlignedVector<double> full, half;
};

Factors integrating_factors(const Grid& g, double nu, double friction, double dt) {
  Factors f;
  f.full.resize(g.spectral_size());
  f.half.resize(g.spectral_size());
  for (std::size_t s = 0; s < g.spectral_size(); ++s) {
    const double l = damping_rate(g, s, nu, friction);
    f.full[s] = std::exp(-l * dt);
    f.half[s] = std::exp(-0.5 * l * dt);
  }
  return f;
}

// One IF-RK4 step of v' = -L v + N(v).
template <class Rhs>
SpectralField if_rk4(const SpectralField& v, const Factors& ef, double dt, Rhs&& rhs) {
  const std::size_t blk = v.block();
  const int nc = v.components();
  auto mix = [&](auto&& fn) {
    SpectralField out(v.grid, v.rank);
    for (int c = 0; c < nc; ++c) {
      auto o = out.component(c);
      for (std::size_t s = 0; s < blk; ++s) o[s] = fn(c, s);
    }
    return out;
  };
  const SpectralField k1 = rhs(v);
  const SpectralField a = mix([&](int c, std::size_t s) {
    return ef.half[s] * (v.component(c)[s] + 0.5 * dt * k1.component(c)[s]);
  });
  const SpectralField k2 = rhs(a);
  const SpectralField b = mix([&](int c, std::size_t s) {
    return ef.half[s] * v.component(c)[s] + 0.5 * dt * k2.component(c)[s];
  });
  const SpectralField k3 = rhs(b);
  const SpectralField cc = mix([&](int c, std::size_t s) {
    return ef.full[s] * v.component(c)[s] + dt * ef.half[s] * k3.component(c)[s];
  });
  const SpectralField k4 = rhs(cc);
  return mix([&](int c, std::size_t s) {
    return ef.full[s] * v.component(c)[s] +
           dt / 6.0 *
               (ef.full[s] * k1.component(c)[s] +
                2.0 * ef.half[s] * (k2.component(c)[s] + k3.component(c)[s]) + k4.component(c)[s]);
  });
}

bool all_finite(const SpectralField& f) {
  for (const auto& c : f.coeffs) {
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
  }
  return true;
}

}  // namespace

SpectralField nonlinear_term(const SpectralField& u) {
  if (u.rank != 1) throw std::invalid_argument("nonlinear_term: needs a vector field");
  return leray_project(divergence_of_products(u));
}

SpectralField velocity_tendency(const SpectralField& u, const SpectralField& f, double nu,
                                double friction) {
  require_same_grid(u.grid, f.grid, "velocity_tendency");
  SpectralField out = leray_project(divergence_of_products(u) + f);
  const Grid& g = u.grid;
  for (std::size_t s = 0; s < u.block(); ++s) {
    const double l = damping_rate(g, s, nu, friction);
    if (l == 0.0) continue;
    for (int c = 0; c < g.dim; ++c) out.component(c)[s] -= l * u.component(c)[s];
  }
  return out;
}

SpectralField pressure(const SpectralField& u) {
  const Grid& g = u.grid;
  // lap p = -d_i d_j (u_i u_j), then divide by -k^2.
  SpectralField mdiv = divergence_of_products(u);  // -div(uu)
  SpectralField lap_p = spectral_divergence(mdiv);  // -div div (uu) = lap p
  SpectralField p(g, 0);
  for (std::size_t s = 0; s < p.block(); ++s) {
    const double k2 = k_squared(g, s);
    if (k2 > 0.0) p.coeffs[s] = -lap_p.coeffs[s] / k2;
  }
  return p;
}

double max_speed(const SpectralField& u) {
  PhysicalField pu = inverse_transform(u);
  double m = 0.0;
  for (std::size_t p = 0; p < pu.block(); ++p) {
    double s2 = 0.0;
    for (int c = 0; c < pu.components(); ++c) s2 += pu.component(c)[p] * pu.component(c)[p];
    m = std::max(m, s2);
  }
  return std::sqrt(m);
}

double cfl_time_step(const SpectralField& u, double cfl_limit) {
  const double umax = max_speed(u);
  if (umax == 0.0) return std::numeric_limits<double>::infinity();
  return cfl_limit * u.grid.spacing() / umax;
}

void advance(FlowState& s, const SpectralField& f, double dt, const StepperOptions& opt) {
  const Grid& g = s.grid;
  require_same_grid(g, f.grid, "advance");
  if (!(dt > 0.0)) throw std::invalid_argument("advance: dt must be positive");
  if (opt.check_cfl) {
    const double limit = cfl_time_step(s.u, opt.cfl_limit);
    if (dt > limit) {
      throw CflViolation("CFL violation: dt = " + std::to_string(dt) + " exceeds " +
                             std::to_string(limit) + "; suggested dt = " + std::to_string(0.9 * limit),
                         0.9 * limit);
    }
  }
  const Factors ef = integrating_factors(g, s.nu, s.friction, dt);
  Formulation form = opt.formulation;
  if (form == Formulation::automatic) form = g.dim == 2 ? Formulation::vorticity : Formulation::velocity;
  if (form == Formulation::vorticity && g.dim != 2) {
    throw std::invalid_argument("vorticity formulation is two-dimensional only");
  }

  SpectralField next;
  if (form == Formulation::vorticity) {
    double mean[2] = {s.u.component(0)[0].real(), s.u.component(1)[0].real()};
    const SpectralField curl_f = spectral_curl(f);
    auto rhs = [&](const SpectralField& w) {
      SpectralField adv = vorticity_advection(velocity_from_vorticity(w, mean[0], mean[1]));
      for (std::size_t i = 0; i < adv.coeffs.size(); ++i) adv.coeffs[i] = curl_f.coeffs[i] - adv.coeffs[i];
      return adv;
    };
    const SpectralField w = if_rk4(spectral_curl(s.u), ef, dt, rhs);
    // k = 0 carries no damping: the mean flow only feels the mean force.
    mean[0] += dt * f.component(0)[0].real();
    mean[1] += dt * f.component(1)[0].real();
    next = velocity_from_vorticity(w, mean[0], mean[1]);
  } else {
    const SpectralField fp = leray_project(f);
    auto rhs = [&](const SpectralField& v) { return leray_project(divergence_of_products(v) + fp); };
    next = if_rk4(s.u, ef, dt, rhs);
  }
  if (!all_finite(next)) {
    throw NumericalAbort("non-finite velocity after step " + std::to_string(s.step) + " at t = " +
                         std::to_string(s.t));
  }
  s.u = std::move(next);
  s.f = f;
  s.t += dt;
  s.step += 1;
}

void step(FlowState& s, const ForcingSampler* forcing, double dt, const StepperOptions& opt) {
  SpectralField f = forcing ? forcing->sample(s.u, s.step) : SpectralField(s.grid, 1);
  advance(s, f, dt, opt);
}

ScalarDiagnostic energy_input_rate(const SpectralField& u, const SpectralField& f) {
  require_same_grid(u.grid, f.grid, "energy_input_rate");
  ScalarDiagnostic out{PhysicalField(u.grid, 0), spectral_inner(u, f)};
  PhysicalField pu = inverse_transform(u);
  PhysicalField pf = inverse_transform(f);
  for (int c = 0; c < pu.components(); ++c) {
    for (std::size_t p = 0; p < pu.block(); ++p) out.field.values[p] += pu.component(c)[p] * pf.component(c)[p];
  }
  return out;
}

ScalarDiagnostic energy_input_rate(const FlowState& s) { return energy_input_rate(s.u, s.f); }

ScalarDiagnostic dissipation_rate(const SpectralField& u, double nu) {
  if (nu < 0.0) throw std::invalid_argument("dissipation_rate: nu must be >= 0");
  const Grid& g = u.grid;
  ScalarDiagnostic out{PhysicalField(g, 0), 0.0};
  if (nu == 0.0) return out;
  PhysicalField grad = inverse_transform(spectral_gradient(u));
  for (int c = 0; c < grad.components(); ++c) {
    for (std::size_t p = 0; p < grad.block(); ++p) out.field.values[p] += nu * grad.component(c)[p] * grad.component(c)[p];
  }
  double sum = 0.0;
  for (int c = 0; c < u.components(); ++c) {
    auto blk = u.component(c);
    for (std::size_t s = 0; s < blk.size(); ++s) sum += g.mode_weight(s) * k_squared(g, s) * std::norm(blk[s]);
  }
  out.mean = nu * sum;
  return out;
}

ScalarDiagnostic dissipation_rate(const FlowState& s) { return dissipation_rate(s.u, s.nu); }

double friction_rate(const SpectralField& u, double friction) {
  if (friction == 0.0) return 0.0;
  const Grid& g = u.grid;
  double sum = 0.0;
  for (int c = 0; c < u.components(); ++c) {
    auto blk = u.component(c);
    for (std::size_t s = 0; s < blk.size(); ++s) {
      const double k2 = k_squared(g, s);
      if (k2 > 0.0 && k2 <= 4.0) sum += g.mode_weight(s) * std::norm(blk[s]);
    }
  }
  return friction * sum;
}

double kinetic_energy(const SpectralField& u) { return 0.5 * spectral_mean_square(u); }

double enstrophy(const SpectralField& u) { return 0.5 * spectral_mean_square(spectral_curl(u)); }

double budget_rate_derivative(const SpectralField& u, const SpectralField& dudt,
                              const SpectralField& f, double nu, double friction) {
  const Grid& g = u.grid;
  double visc = 0.0;
  for (int c = 0; c < u.components(); ++c) {
    auto a = u.component(c);
    auto b = dudt.component(c);
    for (std::size_t s = 0; s < a.size(); ++s) {
      const double l = damping_rate(g, s, nu, friction);
      if (l != 0.0) visc += g.mode_weight(s) * l * (std::conj(a[s]) * b[s]).real();
    }
  }
  return spectral_inner(dudt, f) - 2.0 * visc;
}

}  // namespace cascade
