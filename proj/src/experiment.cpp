#include "cascade/experiment.hpp"

#include <cmath>
#include <map>
#include <random>

#include "cascade/errors.hpp"
#include "cascade/fft.hpp"
#include "cascade/log.hpp"
#include "cascade/snapshot_io.hpp"
#include "cascade/spectral_ops.hpp"

namespace cascade {
namespace {

const std::map<std::string, std::string>& presets() {
  static const std::map<std::string, std::string> table = {
      {"taylor_green", R"(# Decaying 2D Taylor-Green vortex; compared against the exact solution.
[experiment]
name = taylor_green
[grid]
dim = 2
n = 64
[flow]
nu = 0.01
[initial]
kind = taylor_green
[time]
dt = 1e-3
steps = 1000
[output]
series_every = 10
)"},
      {"smooth_scaling", R"(# Band-limited 3D field: the flux across l should scale like l^2.
[experiment]
name = smooth_scaling
[grid]
dim = 3
n = 128
[initial]
kind = random
kmax = 1
amplitude = 1
[time]
steps = 0
[output]
snapshot_every = 1
[filter]
scales = 2h, 2.6h, 3.4h, 4.5h, 5.8h, 7.6h, 10h, 13h, 17h, 20h
[diagnostics]
inertial_min = 2h
inertial_max = 20h
)"},
      {"inverse2d", R"(# 2D inverse cascade driven by white-in-time shell forcing at k_f = 64.
[experiment]
name = inverse2d
[grid]
dim = 2
n = 512
[flow]
nu = 1e-4
[initial]
kind = zero
[time]
dt = 4e-3
cfl = 0.4
t_end = 4.0
[forcing]
kind = shell
k_f = 64
law = fixed_input_rate
input_rate = 0.1
[output]
series_every = 10
checkpoint_every = 500
release_times = 2.0, 2.25, 2.5, 2.75, 3.0, 3.25, 3.5, 3.75
window_steps = 16
[filter]
scales = 8h, 12h, 16h
[dispersion]
radius_factor = 3
lags = 5
refine = 2
[diagnostics]
spectrum_kmin = 8
spectrum_kmax = 32
)"},
      {"direct3d", R"(# 3D forced-dissipative turbulence with large-scale forcing on 1 <= |k| <= 2.
[experiment]
name = direct3d
[grid]
dim = 3
n = 64
[flow]
nu = 8e-3
[initial]
kind = random
kmax = 3
amplitude = 0.5
[time]
dt = 0.02
cfl = 0.4
t_end = 40
[forcing]
kind = shell
k_f = 1.5
k_lo = 1
k_hi = 2
law = fixed_input_rate
input_rate = 0.1
[output]
series_every = 10
checkpoint_every = 500
release_times = 25, 27, 29, 31, 33, 35, 37, 39
window_steps = 8
[filter]
scales = 4h, 6h, 8h
[dispersion]
radius_factor = 3
refine = 2
[diagnostics]
inertial_min = 4h
inertial_max = 8h
)"},
      {"shear_null", R"(# Steady parallel shear u = (sin x2, 0): no flux, no time asymmetry.
[experiment]
name = shear_null
[grid]
dim = 2
n = 64
[flow]
nu = 0
[initial]
kind = shear
[time]
dt = 0.01
steps = 40
[output]
release_times = 0.2
window_steps = 16
[filter]
scales = 8h
[dispersion]
refine = 2
)"},
  };
  return table;
}

ForcingKind forcing_kind(const Config& c, const std::string& key, const std::string& v) {
  if (v == "none") return ForcingKind::none;
  if (v == "shell") return ForcingKind::shell;
  if (v == "lundgren_band" || v == "lundgren") return ForcingKind::lundgren_band;
  (void)c;
  throw ConfigError(key + ": unknown forcing kind '" + v + "' (none, shell, lundgren_band)", 0, key);
}

template <class F>
auto with_line(const Config& c, const std::string& key, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const std::invalid_argument& e) {
    const auto it = c.entries().find(key);
    const int line = it == c.entries().end() ? 0 : it->second.line;
    const std::string where = it == c.entries().end() ? "" : it->second.source + ":" + std::to_string(line) + ": ";
    throw ConfigError(where + key + ": " + e.what(), line, key);
  } catch (const ConfigError& e) {
    const auto it = c.entries().find(key);
    if (e.line() != 0 || it == c.entries().end()) throw;
    throw ConfigError(it->second.source + ":" + std::to_string(it->second.line) + ": " + e.what(), it->second.line, key);
  }
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& [k, v] : presets()) out.push_back(k);
  return out;
}

std::optional<std::string> preset_text(const std::string& name) {
  auto it = presets().find(name);
  if (it == presets().end()) return std::nullopt;
  return it->second;
}

Config layered_config(const std::optional<std::filesystem::path>& file, const std::optional<std::string>& preset,
                      const Config& overrides) {
  Config from_file;
  if (file) from_file = Config::load(*file);
  std::optional<std::string> name = preset;
  if (!name && from_file.has("experiment.preset")) name = from_file.entries().at("experiment.preset").value;
  Config cfg;
  if (name) {
    auto text = preset_text(*name);
    if (!text) {
      std::string known;
      for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
      throw ConfigError("unknown preset '" + *name + "' (known: " + known + ")", 0, "experiment.preset");
    }
    cfg = Config::parse(*text, "preset " + *name);
  }
  cfg.merge(from_file);
  cfg.merge(overrides);
  cfg.erase("experiment.preset");
  if (name) cfg.set("experiment.preset", *name, "<layering>");
  return cfg;
}

ExperimentSpec load_experiment(const Config& c) {
  ExperimentSpec s;
  s.name = c.get_string("experiment.name", s.name);
  s.seed = static_cast<std::uint64_t>(c.get_int("experiment.seed", 1));
  s.deterministic = c.get_bool("experiment.deterministic", true);
  s.threads = static_cast<int>(c.get_int("experiment.threads", 1));
  s.output = c.get_string("experiment.output", s.name);
  (void)c.get_string("experiment.preset", "");
  if (s.threads < 1) throw ConfigError("experiment.threads must be >= 1", 0, "experiment.threads");

  const int dim = static_cast<int>(c.get_int("grid.dim", 2));
  const int n = static_cast<int>(c.get_int("grid.n", 64));
  const double dealias = c.get_double("grid.dealias", 2.0 / 3.0);
  s.grid = with_line(c, "grid.n", [&] { return Grid(dim, n, dealias); });
  const double h = s.grid.spacing();

  s.nu = c.get_double("flow.nu", 0.0);
  s.friction = c.get_double("flow.friction", 0.0);
  if (s.nu < 0.0) with_line(c, "flow.nu", []() -> int { throw ConfigError("viscosity must be >= 0"); });
  if (s.friction < 0.0) with_line(c, "flow.friction", []() -> int { throw ConfigError("friction must be >= 0"); });
  const std::string form = c.get_string("flow.formulation", "automatic");
  if (form == "automatic") {
    s.formulation = Formulation::automatic;
  } else if (form == "vorticity") {
    s.formulation = Formulation::vorticity;
  } else if (form == "velocity") {
    s.formulation = Formulation::velocity;
  } else {
    with_line(c, "flow.formulation", []() -> int { throw ConfigError("expected automatic, vorticity or velocity"); });
  }
  if (s.formulation == Formulation::vorticity && dim != 2) {
    with_line(c, "flow.formulation", []() -> int { throw ConfigError("vorticity form is 2D only"); });
  }

  s.initial.kind = c.get_string("initial.kind", "zero");
  s.initial.amplitude = c.get_double("initial.amplitude", 1.0);
  s.initial.kmax = static_cast<int>(c.get_int("initial.kmax", 4));
  s.initial.slope = c.get_double("initial.slope", 0.0);
  s.initial.seed = static_cast<std::uint64_t>(c.get_int("initial.seed", static_cast<std::int64_t>(s.seed)));
  s.initial.velocity = c.get_doubles("initial.velocity", {});
  s.initial.file = c.get_string("initial.file", "");
  {
    static const char* kinds[] = {"zero", "taylor_green", "random", "shear", "uniform", "snapshot"};
    bool ok = false;
    for (const char* k : kinds) ok = ok || s.initial.kind == k;
    if (!ok) {
      with_line(c, "initial.kind", []() -> int {
        throw ConfigError("expected zero, taylor_green, random, shear, uniform or snapshot");
      });
    }
    if (s.initial.kind == "uniform" && static_cast<int>(s.initial.velocity.size()) != dim) {
      with_line(c, "initial.velocity", []() -> int { throw ConfigError("needs one component per dimension"); });
    }
    if (s.initial.kind == "snapshot" && s.initial.file.empty()) {
      throw ConfigError("initial.kind = snapshot needs initial.file", 0, "initial.file");
    }
  }

  s.dt = c.get_double("time.dt", 1e-3);
  s.cfl = c.get_double("time.cfl", 0.0);
  s.steps = c.get_int("time.steps", 0);
  s.t_end = c.get_double("time.t_end", 0.0);
  if (!(s.dt > 0.0)) with_line(c, "time.dt", []() -> int { throw ConfigError("time step must be positive"); });
  if (s.cfl < 0.0 || s.cfl > 1.0) with_line(c, "time.cfl", []() -> int { throw ConfigError("expected 0 <= cfl <= 1"); });
  if (s.steps < 0) with_line(c, "time.steps", []() -> int { throw ConfigError("steps must be >= 0"); });
  if (s.t_end < 0.0) with_line(c, "time.t_end", []() -> int { throw ConfigError("t_end must be >= 0"); });

  auto& f = s.forcing;
  f.kind = with_line(c, "forcing.kind", [&] { return forcing_kind(c, "forcing.kind", c.get_string("forcing.kind", "none")); });
  f.k_f = c.get_double("forcing.k_f", 0.0);
  f.k_lo = c.get_double("forcing.k_lo", 0.0);
  f.k_hi = c.get_double("forcing.k_hi", 0.0);
  const std::string law = c.get_string("forcing.law", "fixed_input_rate");
  if (law == "fixed_input_rate") {
    f.law = AmplitudeLaw::fixed_input_rate;
  } else if (law == "fixed_amplitude") {
    f.law = AmplitudeLaw::fixed_amplitude;
  } else {
    with_line(c, "forcing.law", []() -> int { throw ConfigError("expected fixed_input_rate or fixed_amplitude"); });
  }
  f.input_rate = c.get_double("forcing.input_rate", 0.0);
  f.amplitude = c.get_double("forcing.amplitude", 0.0);
  f.alpha = c.get_double("forcing.alpha", 0.0);
  f.seed = static_cast<std::uint64_t>(c.get_int("forcing.seed", static_cast<std::int64_t>(s.seed)));
  if (f.kind != ForcingKind::none) {
    // builds the sampler once to surface band errors at load time
    with_line(c, "forcing.k_f", [&] { return make_forcing(s.grid, f) != nullptr; });
  }

  auto& o = s.output_spec;
  o.series_every = c.get_int("output.series_every", 1);
  o.snapshot_every = c.get_int("output.snapshot_every", 0);
  o.checkpoint_every = c.get_int("output.checkpoint_every", 0);
  o.release_times = c.get_doubles("output.release_times", {});
  o.window_steps = static_cast<int>(c.get_int("output.window_steps", 4));
  o.resolved_budget_steps = c.get_int("output.resolved_budget_steps", 100);
  if (o.resolved_budget_steps < 0) with_line(c, "output.resolved_budget_steps", []() -> int { throw ConfigError("must be >= 0"); });
  if (o.series_every < 1) with_line(c, "output.series_every", []() -> int { throw ConfigError("must be >= 1"); });
  if (o.window_steps < 1) with_line(c, "output.window_steps", []() -> int { throw ConfigError("must be >= 1"); });
  for (std::size_t i = 1; i < o.release_times.size(); ++i) {
    if (!(o.release_times[i] > o.release_times[i - 1])) {
      with_line(c, "output.release_times", []() -> int { throw ConfigError("release times must increase"); });
    }
  }

  s.filter_profile = with_line(c, "filter.profile", [&] {
    return kernel_profile_from_string(c.get_string("filter.profile", "bump"));
  });
  s.scales = c.get_lengths("filter.scales", {}, h);
  for (std::size_t i = 0; i < s.scales.size(); ++i) {
    if (s.scales[i] < 2.0 * h) {
      with_line(c, "filter.scales", []() -> int { throw ConfigError("filter scales must be at least 2h"); });
    }
    if (i > 0 && !(s.scales[i] > s.scales[i - 1])) {
      with_line(c, "filter.scales", []() -> int { throw ConfigError("filter scales must increase"); });
    }
  }

  auto& d = s.dispersion;
  d.radius_factor = c.get_double("dispersion.radius_factor", 3.0);
  d.profile = with_line(c, "dispersion.profile", [&] {
    return separation_profile_from_string(c.get_string("dispersion.profile", "bump"));
  });
  d.directions = static_cast<int>(c.get_int("dispersion.directions", 0));
  d.radii = static_cast<int>(c.get_int("dispersion.radii", 4));
  d.lattice = static_cast<int>(c.get_int("dispersion.lattice", 0));
  d.tau_min_factor = c.get_double("dispersion.tau_min_factor", 1e-3);
  d.lags = static_cast<int>(c.get_int("dispersion.lags", 7));
  d.interpolation = with_line(c, "dispersion.interpolation", [&] {
    return interpolation_scheme_from_string(c.get_string("dispersion.interpolation", "cubic"));
  });
  d.refine = static_cast<int>(c.get_int("dispersion.refine", 2));
  d.substeps = static_cast<int>(c.get_int("dispersion.substeps", 4));
  d.fit_threshold = c.get_double("dispersion.fit_threshold", 0.1);
  d.frozen = c.get_bool("dispersion.frozen", false);
  if (d.lattice == 0) d.lattice = dim == 2 ? 16 : 8;
  if (d.lags < 4) with_line(c, "dispersion.lags", []() -> int { throw ConfigError("at least four lags are needed"); });
  if (!(d.radius_factor > 0.0)) with_line(c, "dispersion.radius_factor", []() -> int { throw ConfigError("must be positive"); });
  if (d.refine < 1) with_line(c, "dispersion.refine", []() -> int { throw ConfigError("must be >= 1"); });
  if (d.substeps < 1) with_line(c, "dispersion.substeps", []() -> int { throw ConfigError("must be >= 1"); });
  if (!(d.tau_min_factor > 0.0)) with_line(c, "dispersion.tau_min_factor", []() -> int { throw ConfigError("must be positive"); });

  auto& dg = s.diagnostics;
  dg.inertial_min = c.get_length("diagnostics.inertial_min", 0.0, h);
  dg.inertial_max = c.get_length("diagnostics.inertial_max", 0.0, h);
  dg.structure_points = static_cast<int>(c.get_int("diagnostics.structure_points", 8));
  dg.spectrum_kmin = c.get_double("diagnostics.spectrum_kmin", 0.0);
  dg.spectrum_kmax = c.get_double("diagnostics.spectrum_kmax", 0.0);
  if (dg.inertial_max < dg.inertial_min) {
    with_line(c, "diagnostics.inertial_max", []() -> int { throw ConfigError("window upper end below lower end"); });
  }

  c.reject_unknown();

  // scale ordering h < l_min, l_max < R < L/2 with L the box
  if (!s.scales.empty()) {
    const double lmax = s.scales.back();
    const double radius = d.radius_factor * lmax;
    auto note = [&](const std::string& m) {
      s.warnings.push_back(m);
      warn("scale ordering: " + m);
    };
    if (!(d.radius_factor > 1.0)) note("averaging radius R does not exceed the largest filter scale");
    if (!(radius < s.grid.length() / 2.0)) note("averaging radius R = " + format_double(radius) + " is not below half the box");
  }

  s.canonical = c.canonical({"experiment.output", "experiment.threads"});
  s.config_hash = hex64(fnv1a64(s.canonical));
  return s;
}

SpectralField initial_velocity(const ExperimentSpec& spec) {
  const Grid& g = spec.grid;
  const auto& in = spec.initial;
  if (in.kind == "snapshot") {
    FlowSnapshot snap = read_flow_snapshot(in.file);
    if (!(snap.grid == g)) throw ConfigError("initial snapshot grid does not match [grid]", 0, "initial.file");
    return snap.u;
  }
  PhysicalField p(g, 1);
  if (in.kind == "zero") return SpectralField(g, 1);
  if (in.kind == "uniform") {
    SpectralField u(g, 1);
    for (int c = 0; c < g.dim; ++c) u.component(c)[0] = in.velocity[static_cast<std::size_t>(c)];
    return u;
  }
  if (in.kind == "taylor_green" || in.kind == "shear") {
    for (std::size_t i = 0; i < g.physical_size(); ++i) {
      const auto x = g.position(i);
      if (in.kind == "shear") {
        p.component(0)[i] = in.amplitude * std::sin(x[1]);
      } else if (g.dim == 2) {
        p.component(0)[i] = in.amplitude * std::sin(x[0]) * std::cos(x[1]);
        p.component(1)[i] = -in.amplitude * std::cos(x[0]) * std::sin(x[1]);
      } else {
        p.component(0)[i] = in.amplitude * std::sin(x[0]) * std::cos(x[1]) * std::cos(x[2]);
        p.component(1)[i] = -in.amplitude * std::cos(x[0]) * std::sin(x[1]) * std::cos(x[2]);
      }
    }
    SpectralField u = forward_transform(p);
    // exact modes; clear transform roundoff elsewhere
    for (auto& c : u.coeffs) {
      if (std::abs(c) < 1e-15) c = 0.0;
    }
    return u;
  }
  // random: Gaussian samples, shell |k| <= kmax, spectral slope, projected, rescaled to rms amplitude
  std::mt19937_64 rng(in.seed);
  std::normal_distribution<double> normal;
  for (auto& v : p.values) v = normal(rng);
  SpectralField u = forward_transform(p);
  for (std::size_t s = 0; s < g.spectral_size(); ++s) {
    const auto k = g.wavevector(s);
    const double k2 = double(k[0]) * k[0] + double(k[1]) * k[1] + double(k[2]) * k[2];
    bool nyq = false;
    for (int i = 0; i < g.dim; ++i) nyq = nyq || k[i] == -g.n / 2;
    const double scale = (k2 == 0.0 || k2 > double(in.kmax) * in.kmax || nyq) ? 0.0 : std::pow(k2, 0.5 * in.slope);
    for (int c = 0; c < g.dim; ++c) u.component(c)[s] *= scale;
  }
  u = leray_project(u);
  dealias_in_place(u);
  const double ms = spectral_mean_square(u);
  if (ms > 0.0) u *= in.amplitude / std::sqrt(ms);
  return u;
}

}  // namespace cascade
