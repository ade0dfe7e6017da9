#include "cascade/disperse.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <thread>

#include "cascade/diagnostics.hpp"
#include "cascade/errors.hpp"
#include "cascade/fft.hpp"
#include "cascade/filter.hpp"
#include "cascade/log.hpp"
#include "cascade/solver.hpp"
#include "cascade/spectral_ops.hpp"

namespace cascade {
namespace {

std::string job_suffix(const AnomalyReport& r) {
  return std::to_string(r.scale_index) + "_" + std::to_string(r.release_index);
}

// Snapshot at t0 within the window, or throws.
const FlowSnapshot& release_node(const std::vector<FlowSnapshot>& window, double t0) {
  for (const auto& s : window) {
    if (std::abs(s.t - t0) <= 1e-9 * std::max(1.0, std::abs(t0))) return s;
  }
  throw MissingData("no stored snapshot at the release time " + format_double(t0));
}

}  // namespace

AnomalyReport disperse_one(const ExperimentSpec& spec, const std::vector<FlowSnapshot>& window, double t0,
                           double ell, bool frozen) {
  if (window.empty()) throw MissingData("empty snapshot window");
  const auto& d = spec.dispersion;
  const FlowSnapshot& at = release_node(window, t0);
  const Grid& g = at.grid;
  const FilterKernel k = make_filter_kernel(g, spec.filter_profile, ell);

  AnomalyReport r;
  r.config_hash = spec.config_hash;
  r.dim = g.dim;
  r.n = g.n;
  r.nu = at.nu;
  r.friction = spec.friction;
  r.t0 = t0;
  r.ell = ell;
  r.radius = d.radius_factor * ell;
  r.frozen = frozen;

  FilteredHistory history = [&] {
    if (frozen) return FilteredHistory::frozen(mollify(at.u, k), d.interpolation, d.refine);
    std::vector<FilteredNode> nodes;
    for (const auto& s : window) nodes.push_back(make_filtered_node(s, k, spec.friction));
    return FilteredHistory(std::move(nodes), d.interpolation, d.refine);
  }();
  const SpectralField ubar = mollify(at.u, k);
  r.tau_ell = turnover_time(ubar, ell);
  if (!std::isfinite(r.tau_ell)) {
    r.warnings.push_back("filtered velocity has no increments at scale l; all estimates are zero");
    return r;
  }
  const double tau_min = d.tau_min_factor * r.tau_ell;
  const auto lags = geometric_lags(tau_min, d.lags);
  if (!frozen && (t0 - lags.back() < history.t_begin() || t0 + lags.back() > history.t_end())) {
    throw MissingData("stored window [" + format_double(history.t_begin()) + ", " + format_double(history.t_end()) +
                      "] does not cover t0 +- " + format_double(lags.back()) + " (l = " + format_double(ell) +
                      ", tau_l = " + format_double(r.tau_ell) + "); store more steps around the release time");
  }

  const auto q = make_separation_quadrature(g, r.radius, d.profile, d.directions, d.radii);
  auto e = make_tracer_ensemble(g.dim, t0, ell, lattice_points(g, d.lattice), q, lags);
  AdvectOptions opt;
  opt.substeps = d.substeps;
  advect(e, history, +1, opt);
  advect(e, history, -1, opt);

  r.fit = asymmetry_coefficient(e, d.fit_threshold);
  r.om_lagrangian = ottmann_lagrangian(e);
  const int node = frozen ? 0 : history.node_at(t0);
  r.om_eulerian = ottmann_eulerian(history.node_interpolant(static_cast<std::size_t>(node)), e);

  SpectralField f_avg = at.f_before;
  f_avg += at.f_after;
  f_avg *= 0.5;
  FlowState s(g, at.nu, spec.friction);
  s.u = at.u;
  s.f = frozen ? SpectralField(g, 1) : f_avg;
  s.t = at.t;
  if (frozen) {
    // frozen field: acceleration is the advective part only
    const PhysicalField ub = inverse_transform(ubar);
    const PhysicalField grad = inverse_transform(spectral_gradient(ubar));
    PhysicalField a(g, 1);
    const int dim = g.dim;
    for (std::size_t p = 0; p < g.physical_size(); ++p) {
      for (int c = 0; c < dim; ++c) {
        double v = 0.0;
        for (int i = 0; i < dim; ++i) v += ub.component(i)[p] * grad.component(i * dim + c)[p];
        a.component(c)[p] = v;
      }
    }
    r.om_eulerian_torus = ottmann_eulerian_torus(ubar, a, q);
  } else {
    r.om_eulerian_torus = ottmann_eulerian_torus(ubar, filtered_acceleration(s, k), q);
  }
  r.mean_flux = mean_flux(at.u, k);
  r.dissipation = dissipation_rate(at.u, at.nu).mean;
  r.input = spectral_inner(at.u, f_avg);
  r.friction_loss = friction_rate(at.u, spec.friction);

  if (r.fit.flagged) {
    r.warnings.push_back("asymmetry fit residual exceeds " + format_double(d.fit_threshold) + " |A0|");
  }
  if (!(r.radius < g.length() / 2.0)) r.warnings.push_back("averaging radius R is not below half the box");
  return r;
}

std::vector<AnomalyReport> disperse(const ExperimentSpec& spec, const std::filesystem::path& run_dir) {
  if (spec.scales.empty()) throw ConfigError("dispersion needs at least one filter scale (filter.scales)", 0, "filter.scales");
  const KeyValues man = read_key_values(run_dir / "manifest.txt");
  if (man.count("config_hash") && man.at("config_hash") != spec.config_hash) {
    warn("run directory was produced with config hash " + man.at("config_hash") + ", current config is " +
         spec.config_hash);
  }
  const bool frozen = spec.dispersion.frozen;
  std::vector<ReleaseWindow> windows = read_windows(run_dir);
  if (windows.empty()) throw MissingData("run in " + run_dir.string() + " recorded no release windows");

  // One release in memory at a time; its scales run in parallel.
  std::vector<AnomalyReport> out(spec.scales.size() * windows.size());
  for (std::size_t j = 0; j < windows.size(); ++j) {
    std::vector<FlowSnapshot> loaded;
    if (frozen) {
      if (windows[j].step < 0) throw MissingData("release time " + format_double(windows[j].requested_time) + " was never reached");
      loaded.push_back(read_flow_snapshot(snapshot_path(run_dir, windows[j].step)));
    } else {
      loaded = load_window(run_dir, windows[j]);
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
      for (std::size_t i = next++; i < spec.scales.size(); i = next++) {
        try {
          auto& r = out[i * windows.size() + j];
          r = disperse_one(spec, loaded, windows[j].time, spec.scales[i], frozen);
          r.scale_index = i;
          r.release_index = j;
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    };
    const int nthreads = std::max(1, std::min<int>(spec.threads, static_cast<int>(spec.scales.size())));
    std::vector<std::thread> pool;
    for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }
  return out;
}

KeyValues anomaly_report_values(const AnomalyReport& r) {
  KeyValues kv;
  kv["kind"] = "anomaly_report";
  kv["config_hash"] = r.config_hash;
  kv["dim"] = std::to_string(r.dim);
  kv["n"] = std::to_string(r.n);
  kv["nu"] = format_double(r.nu);
  kv["friction"] = format_double(r.friction);
  kv["frozen"] = r.frozen ? "true" : "false";
  kv["scale_index"] = std::to_string(r.scale_index);
  kv["release_index"] = std::to_string(r.release_index);
  kv["t0"] = format_double(r.t0);
  kv["ell"] = format_double(r.ell);
  kv["radius"] = format_double(r.radius);
  kv["tau_ell"] = format_double(r.tau_ell);
  kv["lags"] = std::to_string(r.fit.tau.size());
  kv["a0"] = format_double(r.fit.a0);
  kv["a0_stderr"] = format_double(r.fit.a0_stderr);
  kv["c1"] = format_double(r.fit.c1);
  kv["fit_residual"] = format_double(r.fit.residual);
  kv["fit_flagged"] = r.fit.flagged ? "true" : "false";
  kv["om_lagrangian"] = format_double(r.om_lagrangian);
  kv["om_eulerian"] = format_double(r.om_eulerian);
  kv["om_eulerian_torus"] = format_double(r.om_eulerian_torus);
  kv["mean_flux"] = format_double(r.mean_flux);
  kv["dissipation"] = format_double(r.dissipation);
  kv["input"] = format_double(r.input);
  kv["friction_loss"] = format_double(r.friction_loss);
  for (std::size_t i = 0; i < r.warnings.size(); ++i) kv["warning." + std::to_string(i)] = r.warnings[i];
  return kv;
}

void write_anomaly_report(const std::filesystem::path& dir, const AnomalyReport& r) {
  std::filesystem::create_directories(dir);
  const std::string header =
      "dispersion asymmetry report\n"
      "A(tau) = (forward - backward) / (4 tau^3) is fitted as a0 + c1 tau over the lags;\n"
      "a0 ~ om/2 is compared with -<Pi_l> (inverse cascade) or -nu<|grad u|^2> (direct cascade).\n"
      "Only window-averaged quantities are compared; the flux/dissipation identity need not hold pointwise.\n"
      "Engineering tolerances: sign plus 30% magnitude at finite l, R, tau.";
  write_key_values(dir / ("report_" + job_suffix(r) + ".txt"), anomaly_report_values(r), header);
  const auto path = dir / ("dispersion_" + job_suffix(r) + ".csv");
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << "# config_hash=" << r.config_hash << "\n";
  os << "ell,R,tau,forward,backward,asymmetry\n";
  for (std::size_t m = 0; m < r.fit.tau.size(); ++m) {
    os << format_double(r.ell) << "," << format_double(r.radius) << "," << format_double(r.fit.tau[m]) << ","
       << format_double(r.fit.forward[m]) << "," << format_double(r.fit.backward[m]) << ","
       << format_double(r.fit.asymmetry[m]) << "\n";
  }
}

}  // namespace cascade
