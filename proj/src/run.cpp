#include "cascade/run.hpp"

#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>

#include "cascade/commands.hpp"
#include "cascade/errors.hpp"
#include "cascade/fft.hpp"
#include "cascade/filter.hpp"
#include "cascade/log.hpp"
#include "cascade/spectral_ops.hpp"

namespace cascade {
namespace {

const char* kSeriesHeader =
    "step,t,dt,energy,enstrophy,input,dissipation,friction,budget_residual,budget_residual_corrected";

double taylor_green_error(const FlowState& s, double amplitude) {
  const Grid& g = s.grid;
  const PhysicalField p = inverse_transform(s.u);
  const double decay = amplitude * std::exp(-2.0 * s.nu * s.t);
  double err = 0.0;
  for (std::size_t i = 0; i < g.physical_size(); ++i) {
    const auto x = g.position(i);
    err = std::max(err, std::abs(p.component(0)[i] - decay * std::sin(x[0]) * std::cos(x[1])));
    err = std::max(err, std::abs(p.component(1)[i] + decay * std::cos(x[0]) * std::sin(x[1])));
  }
  return err;
}

struct BudgetPoint {
  double energy = 0.0;
  double input = 0.0;
  double dissipation = 0.0;
  double friction = 0.0;
  double rate_derivative = 0.0;
  double rate() const { return input - dissipation - friction; }
};

// <|grad u|^2> by Parseval.
double gradient_mean_square(const SpectralField& u) {
  const Grid& g = u.grid;
  double sum = 0.0;
  for (int c = 0; c < u.components(); ++c) {
    auto blk = u.component(c);
    for (std::size_t s = 0; s < blk.size(); ++s) {
      const auto kv = g.wavevector(s);
      const double k2 = double(kv[0]) * kv[0] + double(kv[1]) * kv[1] + double(kv[2]) * kv[2];
      sum += g.mode_weight(s) * k2 * std::norm(blk[s]);
    }
  }
  return sum;
}

BudgetPoint budget_point(const SpectralField& u, const SpectralField& f, double nu, double mu) {
  BudgetPoint b;
  b.energy = kinetic_energy(u);
  b.input = spectral_inner(u, f);
  b.dissipation = nu * gradient_mean_square(u);
  b.friction = friction_rate(u, mu);
  b.rate_derivative = budget_rate_derivative(u, velocity_tendency(u, f, nu, mu), f, nu, mu);
  return b;
}

// Global rate of the resolved energy under a fixed force:
// -<Pi> + <ubar.fbar> - nu <|grad ubar|^2> - friction on ubar.
struct ResolvedRate {
  double energy = 0.0;
  double rate = 0.0;
  double magnitude = 0.0;
};

ResolvedRate resolved_rate(const SpectralField& u, const SpectralField& f, const FilterKernel& k, double nu,
                           double mu, bool with_energy) {
  const SpectralField ub = mollify(u, k);
  const double grad2 = gradient_mean_square(ub);
  const double flux = mean_flux(u, k);
  const double work = spectral_inner(ub, mollify(f, k));
  const double visc = nu * grad2;
  const double fric = friction_rate(ub, mu);
  ResolvedRate r;
  if (with_energy) r.energy = kinetic_energy(ub);
  r.rate = -flux + work - visc - fric;
  r.magnitude = std::abs(flux) + std::abs(work) + visc + fric;
  return r;
}

// d/dt of the resolved rate along du/dt, by a central difference; the rate is
// a cubic polynomial in u so the step only needs to be small, not tiny.
double resolved_rate_derivative(const SpectralField& u, const SpectralField& f, const FilterKernel& k, double nu,
                                double mu) {
  const SpectralField v = velocity_tendency(u, f, nu, mu);
  const double nv = std::sqrt(spectral_mean_square(v));
  if (nv == 0.0) return 0.0;
  const double delta = 1e-3 * std::max(std::sqrt(spectral_mean_square(u)), 1e-300) / nv;
  const double rp = resolved_rate(u + delta * v, f, k, nu, mu, false).rate;
  const double rm = resolved_rate(u - delta * v, f, k, nu, mu, false).rate;
  return (rp - rm) / (2.0 * delta);
}

void write_windows(const std::filesystem::path& path, const std::vector<ReleaseWindow>& ws, const std::string& hash) {
  KeyValues kv;
  kv["config_hash"] = hash;
  kv["count"] = std::to_string(ws.size());
  for (std::size_t i = 0; i < ws.size(); ++i) {
    const std::string p = "release." + std::to_string(i) + ".";
    kv[p + "requested_time"] = format_double(ws[i].requested_time);
    kv[p + "time"] = format_double(ws[i].time);
    kv[p + "step"] = std::to_string(ws[i].step);
    kv[p + "first_step"] = std::to_string(ws[i].first_step);
    kv[p + "last_step"] = std::to_string(ws[i].last_step);
    kv[p + "complete"] = ws[i].complete ? "true" : "false";
  }
  write_key_values(path, kv);
}

std::string csv_row(const std::vector<std::string>& cells) {
  std::string s;
  for (std::size_t i = 0; i < cells.size(); ++i) s += (i ? "," : "") + cells[i];
  return s + "\n";
}

}  // namespace

std::filesystem::path snapshot_path(const std::filesystem::path& run_dir, std::int64_t step) {
  char name[32];
  std::snprintf(name, sizeof(name), "step_%08lld.bin", static_cast<long long>(step));
  return run_dir / "snapshots" / name;
}

RunSummary run_experiment(const ExperimentSpec& spec, const std::filesystem::path& out,
                          const std::optional<std::filesystem::path>& restart) {
  namespace fs = std::filesystem;
  fs::create_directories(out / "snapshots");
  const Grid& g = spec.grid;
  const auto forcing = make_forcing(g, spec.forcing);
  StepperOptions opt;
  opt.formulation = spec.formulation;
  opt.cfl_limit = 0.5;

  FlowState state(g, spec.nu, spec.friction);
  state.f = SpectralField(g, 1);
  RunSummary sum;
  std::vector<ReleaseWindow> windows;
  for (double t : spec.output_spec.release_times) windows.push_back(ReleaseWindow{t, 0.0, -1, 0, 0, false});

  std::vector<std::string> kept_rows;
  if (restart) {
    const KeyValues ck = read_key_values(*restart / "checkpoint.txt");
    if (ck.at("config_hash") != spec.config_hash) {
      throw ConfigError("checkpoint in " + restart->string() + " was written with config hash " +
                        ck.at("config_hash") + ", current config hashes to " + spec.config_hash);
    }
    FlowSnapshot snap = read_flow_snapshot(*restart / "checkpoint.bin");
    state.u = snap.u;
    state.f = snap.f_before;
    state.t = snap.t;
    state.step = std::stoll(ck.at("step"));
    if (fs::exists(*restart / "windows.txt")) {
      const auto old = read_windows(*restart);
      for (std::size_t i = 0; i < old.size() && i < windows.size(); ++i) windows[i] = old[i];
    }
    std::ifstream is(*restart / "series.csv");
    std::string line;
    std::getline(is, line);
    while (std::getline(is, line)) {
      if (std::stoll(line.substr(0, line.find(','))) < state.step) kept_rows.push_back(line + "\n");
    }
  } else {
    state.u = initial_velocity(spec);
  }
  sum.first_step = state.step;

  {
    std::ofstream cfg(out / "config.txt", std::ios::trunc);
    cfg << "# effective configuration, config_hash=" << spec.config_hash << "\n" << sectioned_config(spec.canonical);
  }
  std::ofstream series(out / "series.csv", std::ios::trunc);
  if (!series) throw std::runtime_error("cannot write " + (out / "series.csv").string());
  series << kSeriesHeader << "\n";
  for (const auto& r : kept_rows) series << r;

  const double t_tol = 1e-12 * std::max(1.0, spec.t_end);
  const int K = spec.output_spec.window_steps;
  std::deque<FlowSnapshot> ring;  // last K completed nodes
  std::set<std::int64_t> written;
  auto store = [&](const FlowSnapshot& node, std::int64_t step) {
    if (written.count(step)) return;
    write_flow_snapshot(snapshot_path(out, step), node);
    written.insert(step);
    ++sum.snapshots_written;
  };
  auto in_window = [&](std::int64_t step) {
    for (const auto& w : windows) {
      if (w.step >= 0 && step >= w.first_step && step <= w.last_step) return true;
    }
    return false;
  };
  auto trigger_releases = [&](std::int64_t step, double t, std::deque<FlowSnapshot>& history) {
    for (auto& w : windows) {
      if (w.step >= 0 || std::abs(t - w.requested_time) > t_tol) continue;
      w.step = step;
      w.time = t;
      w.first_step = step - K;
      w.last_step = step + K;
      if (w.first_step < sum.first_step) {
        warn("release time " + format_double(w.requested_time) + " has fewer than " + std::to_string(K) +
             " stored steps before it");
        w.first_step = std::max<std::int64_t>(w.first_step, 0);
      }
      std::int64_t s = step - static_cast<std::int64_t>(history.size());
      for (const auto& node : history) {
        if (s >= w.first_step) store(node, s);
        ++s;
      }
    }
  };
  auto finished = [&]() {
    if (spec.steps > 0) return state.step >= spec.steps;
    return !(state.t < spec.t_end - t_tol);
  };
  auto write_checkpoint = [&](const SpectralField& f_after) {
    write_flow_snapshot(out / "checkpoint.bin", FlowSnapshot{g, state.t, state.nu, state.u, state.f, f_after});
    KeyValues kv;
    kv["config_hash"] = spec.config_hash;
    kv["step"] = std::to_string(state.step);
    kv["t"] = format_double(state.t);
    write_key_values(out / "checkpoint.txt", kv);
    write_windows(out / "windows.txt", windows, spec.config_hash);
  };

  trigger_releases(state.step, state.t, ring);
  const double h = g.spacing();

  std::optional<FilterKernel> res_kernel;
  const std::int64_t res_end = sum.first_step + spec.output_spec.resolved_budget_steps;
  if (!spec.scales.empty() && spec.output_spec.resolved_budget_steps > 0) {
    res_kernel = make_filter_kernel(g, spec.filter_profile, spec.scales.front());
  }
  double res_e0 = 0.0, res_e1 = 0.0, res_integral = 0.0, res_correction = 0.0, res_magnitude = 0.0;
  bool res_started = false;
  while (!finished()) {
    double dt = spec.dt;
    if (spec.cfl > 0.0) {
      const double vmax = max_speed(state.u);
      if (vmax > 0.0) dt = std::min(dt, spec.cfl * h / vmax);
    }
    if (spec.steps == 0) dt = std::min(dt, spec.t_end - state.t);
    for (const auto& w : windows) {
      // land exactly on release times
      if (w.step < 0 && w.requested_time > state.t + t_tol && w.requested_time < state.t + dt) {
        dt = w.requested_time - state.t;
      }
    }

    SpectralField f = forcing ? forcing->sample(state.u, state.step) : SpectralField(g, 1);
    FlowSnapshot node{g, state.t, state.nu, state.u, state.f, f};
    const std::int64_t n = state.step;
    if (in_window(n) || (spec.output_spec.snapshot_every > 0 && n % spec.output_spec.snapshot_every == 0)) {
      store(node, n);
    }
    ring.push_back(node);
    if (static_cast<int>(ring.size()) > K) ring.pop_front();

    const BudgetPoint b0 = budget_point(state.u, f, spec.nu, spec.friction);
    const bool track_resolved = res_kernel && n < res_end;
    ResolvedRate r0;
    double r0p = 0.0;
    if (track_resolved) {
      r0 = resolved_rate(state.u, f, *res_kernel, spec.nu, spec.friction, true);
      r0p = resolved_rate_derivative(state.u, f, *res_kernel, spec.nu, spec.friction);
      if (!res_started) res_e0 = r0.energy;
      res_started = true;
    }
    try {
      advance(state, f, dt, opt);
    } catch (const NumericalAbort&) {
      write_flow_snapshot(out / "abort_snapshot.bin", node);
      series.flush();
      throw;
    } catch (const CflViolation& e) {
      write_flow_snapshot(out / "abort_snapshot.bin", node);
      series.flush();
      throw NumericalAbort("step " + std::to_string(n) + " at t = " + format_double(state.t) + ": " + e.what() +
                           " (set time.cfl for adaptive steps)");
    }
    const BudgetPoint b1 = budget_point(state.u, f, spec.nu, spec.friction);
    const double resid = (b1.energy - b0.energy) - 0.5 * dt * (b0.rate() + b1.rate());
    const double corrected = resid + dt * dt / 12.0 * (b1.rate_derivative - b0.rate_derivative);
    const double scale =
        0.5 * dt * (std::abs(b0.input) + std::abs(b1.input) + b0.dissipation + b1.dissipation + b0.friction + b1.friction);
    const double rel = scale > 0.0 ? std::abs(resid) / scale : 0.0;
    const double rel_c = scale > 0.0 ? std::abs(corrected) / scale : 0.0;
    sum.max_budget_residual = std::max(sum.max_budget_residual, rel);
    sum.max_budget_residual_corrected = std::max(sum.max_budget_residual_corrected, rel_c);
    sum.max_divergence = std::max(sum.max_divergence, max_spectral_divergence(state.u));
    if (track_resolved) {
      const ResolvedRate r1 = resolved_rate(state.u, f, *res_kernel, spec.nu, spec.friction, true);
      const double r1p = resolved_rate_derivative(state.u, f, *res_kernel, spec.nu, spec.friction);
      res_e1 = r1.energy;
      res_integral += 0.5 * dt * (r0.rate + r1.rate);
      res_correction += dt * dt / 12.0 * (r1p - r0p);
      res_magnitude += 0.5 * dt * (r0.magnitude + r1.magnitude);
      ++sum.resolved_budget_steps;
    }

    if (n % spec.output_spec.series_every == 0) {
      series << csv_row({std::to_string(n), format_double(node.t), format_double(dt), format_double(b0.energy),
                         format_double(enstrophy(node.u)), format_double(b0.input), format_double(b0.dissipation),
                         format_double(b0.friction), format_double(rel), format_double(rel_c)});
    }

    trigger_releases(state.step, state.t, ring);
    if (spec.output_spec.checkpoint_every > 0 && state.step % spec.output_spec.checkpoint_every == 0) {
      write_checkpoint(forcing ? forcing->sample(state.u, state.step) : SpectralField(g, 1));
    }
  }

  // final node: its outgoing force is the one the next step would use
  const SpectralField f_last = forcing ? forcing->sample(state.u, state.step) : SpectralField(g, 1);
  const FlowSnapshot last{g, state.t, state.nu, state.u, state.f, f_last};
  if (in_window(state.step) ||
      (spec.output_spec.snapshot_every > 0 && state.step % spec.output_spec.snapshot_every == 0)) {
    store(last, state.step);
  }
  series << csv_row({std::to_string(state.step), format_double(state.t), "", format_double(kinetic_energy(state.u)),
                     format_double(enstrophy(state.u)), format_double(spectral_inner(state.u, f_last)),
                     format_double(spec.nu * gradient_mean_square(state.u)),
                     format_double(friction_rate(state.u, spec.friction)), "", ""});
  series.close();

  for (auto& w : windows) {
    w.complete = w.step >= 0 && w.last_step <= state.step;
    if (w.step >= 0 && !w.complete) {
      warn("release time " + format_double(w.requested_time) + ": run ended before the window closed");
    }
    if (w.step < 0) warn("release time " + format_double(w.requested_time) + " was never reached");
  }
  write_checkpoint(f_last);

  if (sum.resolved_budget_steps > 0 && res_magnitude > 0.0) {
    const double d = res_e1 - res_e0;
    sum.resolved_budget_residual = std::abs(d - res_integral) / res_magnitude;
    sum.resolved_budget_residual_corrected = std::abs(d - res_integral + res_correction) / res_magnitude;
  }
  sum.last_step = state.step;
  sum.t_final = state.t;
  sum.windows = windows;
  if (spec.initial.kind == "taylor_green" && g.dim == 2 && spec.forcing.kind == ForcingKind::none &&
      spec.friction == 0.0) {
    sum.taylor_green_error = taylor_green_error(state, spec.initial.amplitude);
  }

  KeyValues man;
  man["config_hash"] = spec.config_hash;
  man["version"] = kVersion;
  man["name"] = spec.name;
  man["seed"] = std::to_string(spec.seed);
  man["deterministic"] = spec.deterministic ? "true" : "false";
  man["dim"] = std::to_string(g.dim);
  man["n"] = std::to_string(g.n);
  man["nu"] = format_double(spec.nu);
  man["friction"] = format_double(spec.friction);
  man["first_step"] = std::to_string(sum.first_step);
  man["last_step"] = std::to_string(sum.last_step);
  man["t_final"] = format_double(sum.t_final);
  man["max_budget_residual"] = format_double(sum.max_budget_residual);
  man["max_budget_residual_corrected"] = format_double(sum.max_budget_residual_corrected);
  man["max_divergence"] = format_double(sum.max_divergence);
  man["snapshots_written"] = std::to_string(sum.snapshots_written);
  man["restarted"] = restart ? "true" : "false";
  if (sum.resolved_budget_residual) {
    man["resolved_budget_scale"] = format_double(spec.scales.front());
    man["resolved_budget_steps"] = std::to_string(sum.resolved_budget_steps);
    man["resolved_budget_residual"] = format_double(*sum.resolved_budget_residual);
    man["resolved_budget_residual_corrected"] = format_double(*sum.resolved_budget_residual_corrected);
  }
  if (sum.taylor_green_error) man["taylor_green_error"] = format_double(*sum.taylor_green_error);
  for (std::size_t i = 0; i < spec.warnings.size(); ++i) man["warning." + std::to_string(i)] = spec.warnings[i];
  write_key_values(out / "manifest.txt", man, "run manifest\n" + spec.canonical);
  return sum;
}

std::vector<ReleaseWindow> read_windows(const std::filesystem::path& run_dir) {
  const KeyValues kv = read_key_values(run_dir / "windows.txt");
  std::vector<ReleaseWindow> out;
  const int count = std::stoi(kv.at("count"));
  for (int i = 0; i < count; ++i) {
    const std::string p = "release." + std::to_string(i) + ".";
    ReleaseWindow w;
    w.requested_time = std::stod(kv.at(p + "requested_time"));
    w.time = std::stod(kv.at(p + "time"));
    w.step = std::stoll(kv.at(p + "step"));
    w.first_step = std::stoll(kv.at(p + "first_step"));
    w.last_step = std::stoll(kv.at(p + "last_step"));
    w.complete = kv.at(p + "complete") == "true";
    out.push_back(w);
  }
  return out;
}

std::vector<FlowSnapshot> load_window(const std::filesystem::path& run_dir, const ReleaseWindow& w) {
  if (w.step < 0) throw MissingData("release time " + format_double(w.requested_time) + " was never reached by the run");
  std::vector<FlowSnapshot> out;
  for (std::int64_t s = w.first_step; s <= w.last_step; ++s) {
    const auto p = snapshot_path(run_dir, s);
    if (!std::filesystem::exists(p)) {
      throw MissingData("snapshot for step " + std::to_string(s) + " (window around t = " + format_double(w.time) +
                        ") is missing: " + p.string());
    }
    out.push_back(read_flow_snapshot(p));
  }
  return out;
}

std::vector<double> TimeSeries::column(const std::string& name) const {
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c] != name) continue;
    std::vector<double> out;
    for (const auto& r : rows) out.push_back(r[c]);
    return out;
  }
  throw MissingData("time series has no column '" + name + "'");
}

TimeSeries read_time_series(const std::filesystem::path& csv) {
  std::ifstream is(csv);
  if (!is) throw MissingData("cannot open " + csv.string());
  TimeSeries ts;
  std::string line;
  std::getline(is, line);
  {
    std::istringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) ts.columns.push_back(cell);
  }
  while (std::getline(is, line)) {
    std::vector<double> row;
    std::istringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(cell.empty() ? NAN : std::stod(cell));
    while (row.size() < ts.columns.size()) row.push_back(NAN);
    ts.rows.push_back(std::move(row));
  }
  return ts;
}

}  // namespace cascade
