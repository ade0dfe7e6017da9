// cascade: run, disperse, diagnose, report.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

#include "cascade/commands.hpp"
#include "cascade/disperse.hpp"
#include "cascade/errors.hpp"
#include "cascade/experiment.hpp"
#include "cascade/fft.hpp"
#include "cascade/run.hpp"

namespace fs = std::filesystem;
using namespace cascade;

namespace {

enum Exit { ok = 0, failure = 1, config_error = 2, numerical = 3, missing = 4 };

struct Common {
  std::string config;
  std::string preset;
  std::string out;
  std::optional<std::int64_t> seed;
  std::optional<bool> deterministic;
  std::optional<int> threads;
  std::vector<std::string> sets;
};

Config overrides(const Common& c) {
  Config o;
  for (const auto& kv : c.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || kv.find('.') > eq) {
      throw ConfigError("--set expects section.key=value, got '" + kv + "'");
    }
    o.set(kv.substr(0, eq), kv.substr(eq + 1), "--set");
  }
  if (c.seed) o.set("experiment.seed", std::to_string(*c.seed), "--seed");
  if (c.deterministic) o.set("experiment.deterministic", *c.deterministic ? "true" : "false", "--deterministic");
  if (c.threads) o.set("experiment.threads", std::to_string(*c.threads), "--threads");
  if (!c.out.empty()) o.set("experiment.output", c.out, "--out");
  return o;
}

ExperimentSpec load(const Common& c, const std::optional<fs::path>& fallback_config) {
  std::optional<fs::path> file;
  if (!c.config.empty()) {
    file = c.config;
  } else if (fallback_config && fs::exists(*fallback_config)) {
    file = fallback_config;
  }
  std::optional<std::string> preset;
  if (!c.preset.empty()) preset = c.preset;
  ExperimentSpec spec = load_experiment(layered_config(file, preset, overrides(c)));
  set_fft_rigor(spec.deterministic ? FftRigor::estimate : FftRigor::measure);
  return spec;
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "config file");
  app->add_option("--preset", c.preset, "built-in preset (taylor_green, smooth_scaling, inverse2d, direct3d, shear_null)");
  app->add_option("--out", c.out, "output directory");
  app->add_option("--seed", c.seed, "master seed");
  app->add_flag("--deterministic,!--nondeterministic", c.deterministic, "bit-reproducible mode (default on)");
  app->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
  app->add_option("--set", c.sets, "override one key, section.key=value (repeatable)");
}

int cmd_run(const Common& c, const std::string& restart) {
  const ExperimentSpec spec = load(c, std::nullopt);
  const fs::path out = c.out.empty() ? spec.output : fs::path(c.out);
  std::optional<fs::path> from;
  if (!restart.empty()) from = restart;
  const RunSummary s = run_experiment(spec, out, from);
  std::printf("run %s: steps %lld..%lld, t = %.6g, config %s\n", spec.name.c_str(),
              static_cast<long long>(s.first_step), static_cast<long long>(s.last_step), s.t_final,
              spec.config_hash.c_str());
  std::printf("  budget residual per step: %.3e (corrected %.3e)\n", s.max_budget_residual,
              s.max_budget_residual_corrected);
  if (s.resolved_budget_residual) {
    std::printf("  resolved budget over %lld steps: %.3e (corrected %.3e)\n",
                static_cast<long long>(s.resolved_budget_steps), *s.resolved_budget_residual,
                *s.resolved_budget_residual_corrected);
  }
  if (s.taylor_green_error) std::printf("  Taylor-Green max error: %.3e\n", *s.taylor_green_error);
  std::printf("  snapshots: %zu, output: %s\n", s.snapshots_written, out.string().c_str());
  return ok;
}

void require_run_dir(const std::string& run_dir) {
  if (!fs::is_directory(run_dir)) throw MissingData("no run directory " + run_dir);
}

int cmd_disperse(const Common& c, const std::string& run_dir) {
  require_run_dir(run_dir);
  const ExperimentSpec spec = load(c, fs::path(run_dir) / "config.txt");
  const fs::path out = c.out.empty() ? fs::path(run_dir) / "disperse" : fs::path(c.out);
  const auto reports = disperse(spec, run_dir);
  for (const auto& r : reports) {
    write_anomaly_report(out, r);
    std::printf("l = %.5g  t0 = %.5g  A0 = % .4e +- %.1e  OM_L/2 = % .4e  OM_E/2 = % .4e  -<Pi> = % .4e  -eps = % .4e%s\n",
                r.ell, r.t0, r.fit.a0, r.fit.a0_stderr, 0.5 * r.om_lagrangian, 0.5 * r.om_eulerian, -r.mean_flux,
                -r.dissipation, r.fit.flagged ? "  [fit flagged]" : "");
  }
  std::printf("%zu report(s) in %s\n", reports.size(), out.string().c_str());
  return ok;
}

int cmd_diagnose(const Common& c, const std::string& run_dir, std::int64_t step) {
  require_run_dir(run_dir);
  const ExperimentSpec spec = load(c, fs::path(run_dir) / "config.txt");
  const fs::path out = c.out.empty() ? fs::path(run_dir) / "diagnostics" : fs::path(c.out);
  DiagnoseOptions opt;
  opt.step = step;
  diagnose(spec, run_dir, out, opt);
  std::printf("diagnostics in %s\n", out.string().c_str());
  return ok;
}

int cmd_report(const Common& c, const std::vector<std::string>& inputs) {
  std::vector<fs::path> paths(inputs.begin(), inputs.end());
  const ReportSummary s = merge_reports(paths);
  std::cout << format_summary(s);
  if (!c.out.empty()) write_summary(c.out, s);
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pseudo-spectral turbulence runs and Lagrangian dispersion-asymmetry analysis"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  Common common;
  std::string restart;
  std::string run_dir;
  std::int64_t step = -1;
  std::vector<std::string> inputs;

  auto* run = app.add_subcommand("run", "integrate the flow and store snapshots");
  add_common(run, common);
  run->add_option("--restart", restart, "continue from the checkpoint in this run directory");

  auto* disp = app.add_subcommand("disperse", "dispersion asymmetry reports for a finished run");
  add_common(disp, common);
  disp->add_option("run_dir", run_dir, "run directory")->required();

  auto* diag = app.add_subcommand("diagnose", "spectra, structure functions and flux for a run");
  add_common(diag, common);
  diag->add_option("run_dir", run_dir, "run directory")->required();
  diag->add_option("--step", step, "stored step to analyse (default: final state)");

  auto* rep = app.add_subcommand("report", "merge anomaly reports across release times");
  add_common(rep, common);
  rep->add_option("reports", inputs, "report files or directories")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : config_error;
  }

  try {
    if (*run) return cmd_run(common, restart);
    if (*disp) return cmd_disperse(common, run_dir);
    if (*diag) return cmd_diagnose(common, run_dir, step);
    if (*rep) return cmd_report(common, inputs);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return config_error;
  } catch (const NumericalAbort& e) {
    std::fprintf(stderr, "numerical abort: %s\n", e.what());
    return numerical;
  } catch (const MissingData& e) {
    std::fprintf(stderr, "missing data: %s\n", e.what());
    return missing;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return failure;
  }
  return failure;
}
