// Pseudo-spectral incompressible Navier-Stokes / Euler on the torus.
//
// Time stepping is fourth-order Runge-Kutta on the dealiased nonlinear term
// with an exact integrating factor for viscosity (and optional large-scale
// friction). The force is held fixed over each step.
#pragma once

#include <cstdint>

#include "cascade/forcing.hpp"
#include "cascade/grid.hpp"

namespace cascade {

struct FlowState {
  Grid grid;
  double t = 0.0;
  std::int64_t step = 0;
  SpectralField u;  // solenoidal velocity
  SpectralField f;  // force applied over the most recent step
  double nu = 0.0;
  double friction = 0.0;  // -mu u on 0 < |k| <= 2

  FlowState() = default;
  FlowState(const Grid& g, double nu_, double friction_ = 0.0);
};

enum class Formulation { automatic, vorticity, velocity };

struct StepperOptions {
  Formulation formulation = Formulation::automatic;
  double cfl_limit = 0.5;  // dt <= cfl_limit * h / max|u|
  bool check_cfl = true;
};

/// -P div(u u), dealiased.
SpectralField nonlinear_term(const SpectralField& u);

/// Full right-hand side du/dt for velocity u under force f.
SpectralField velocity_tendency(const SpectralField& u, const SpectralField& f, double nu,
                                double friction = 0.0);

/// Kinematic pressure solving -lap p = d_i d_j (u_i u_j) (force assumed solenoidal).
SpectralField pressure(const SpectralField& u);

/// Advance by dt with force f held fixed. Throws CflViolation before touching
/// the state, NumericalAbort if the result is not finite (state untouched).
void advance(FlowState& s, const SpectralField& f, double dt, const StepperOptions& opt = {});

/// Convenience: draws the force from `forcing` (may be null) at the current
/// step index and advances.
void step(FlowState& s, const ForcingSampler* forcing, double dt, const StepperOptions& opt = {});

/// Largest admissible dt for the current velocity.
double cfl_time_step(const SpectralField& u, double cfl_limit = 0.5);

double max_speed(const SpectralField& u);

struct ScalarDiagnostic {
  PhysicalField field;
  double mean = 0.0;
};

/// u.f pointwise and <u.f> (spectral Parseval for the mean).
ScalarDiagnostic energy_input_rate(const SpectralField& u, const SpectralField& f);
ScalarDiagnostic energy_input_rate(const FlowState& s);

/// nu |grad u|^2 pointwise and its mean.
ScalarDiagnostic dissipation_rate(const SpectralField& u, double nu);
ScalarDiagnostic dissipation_rate(const FlowState& s);

/// Energy removed by friction: mu <|u_low|^2>.
double friction_rate(const SpectralField& u, double friction);

double kinetic_energy(const SpectralField& u);
/// 1/2 <|curl u|^2>.
double enstrophy(const SpectralField& u);

/// Time derivative of <u.f> - nu <|grad u|^2> - friction along the
/// trajectory, holding f fixed; used by the corrected trapezoid budget.
double budget_rate_derivative(const SpectralField& u, const SpectralField& dudt,
                              const SpectralField& f, double nu, double friction);

}  // namespace cascade
