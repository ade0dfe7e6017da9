#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cascade/errors.hpp"
#include "cascade/experiment.hpp"
#include "cascade/log.hpp"
#include "cascade/run.hpp"
#include "cascade/spectral_ops.hpp"

using namespace cascade;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("cascade_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

ExperimentSpec spec_from(const std::string& text) { return load_experiment(Config::parse(text)); }

const char* kForced2d =
    "[grid]\nn = 32\n[flow]\nnu = 0.02\n[initial]\nkind = random\nkmax = 3\namplitude = 0.5\n"
    "[time]\ndt = 0.01\nsteps = 24\n[forcing]\nkind = shell\nk_f = 4\ninput_rate = 0.1\n";

}  // namespace

TEST_CASE("zero initial data without forcing stays zero", "[run]") {
  const auto dir = scratch_dir("zero");
  const auto spec = spec_from("[grid]\nn = 16\n[time]\nsteps = 5\n[output]\nsnapshot_every = 1\n");
  run_experiment(spec, dir);
  for (int s = 0; s <= 5; ++s) {
    const auto snap = read_flow_snapshot(snapshot_path(dir, s));
    for (const auto& c : snap.u.coeffs) REQUIRE(c == Complex{0.0, 0.0});
  }
  const auto e = read_time_series(dir / "series.csv").column("energy");
  for (double v : e) CHECK(v == 0.0);
}

TEST_CASE("Taylor-Green preset tracks the exact decay", "[run]") {
  const auto dir = scratch_dir("tg");
  const auto spec = load_experiment(layered_config(std::nullopt, std::string("taylor_green")));
  const auto sum = run_experiment(spec, dir);
  REQUIRE(sum.taylor_green_error.has_value());
  CHECK(*sum.taylor_green_error < 1e-6);
  CHECK(sum.max_divergence < 1e-12);
}

TEST_CASE("decaying 2D run loses energy monotonically and closes its budget", "[run]") {
  const auto dir = scratch_dir("decay");
  const auto spec = spec_from(
      "[grid]\nn = 32\n[flow]\nnu = 0.01\n[initial]\nkind = random\nkmax = 5\n[time]\ndt = 0.005\nsteps = 200\n");
  const auto sum = run_experiment(spec, dir);
  const auto e = read_time_series(dir / "series.csv").column("energy");
  REQUIRE(e.size() == 201);
  for (std::size_t i = 1; i < e.size(); ++i) REQUIRE(e[i] < e[i - 1]);
  CHECK(sum.max_budget_residual_corrected < 1e-6);
}

TEST_CASE("forced runs are byte-identical across repeats", "[run]") {
  const auto a = scratch_dir("det_a");
  const auto b = scratch_dir("det_b");
  const auto spec = spec_from(kForced2d);
  run_experiment(spec, a);
  run_experiment(spec, b);
  CHECK(slurp(a / "series.csv") == slurp(b / "series.csv"));
  CHECK(slurp(a / "checkpoint.bin") == slurp(b / "checkpoint.bin"));
}

TEST_CASE("restart from a checkpoint reproduces the uninterrupted run", "[run]") {
  const auto full = scratch_dir("full");
  const auto part = scratch_dir("part");
  const auto spec = spec_from(kForced2d);
  run_experiment(spec, full);

  auto half = spec_from(std::string(kForced2d) + "[output]\ncheckpoint_every = 10\n");
  half.steps = 10;
  run_experiment(half, part);
  auto rest = spec_from(std::string(kForced2d) + "[output]\ncheckpoint_every = 10\n");
  run_experiment(rest, part, part);

  const auto x = read_flow_snapshot(full / "checkpoint.bin");
  const auto y = read_flow_snapshot(part / "checkpoint.bin");
  double err = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < x.u.coeffs.size(); ++i) {
    err = std::max(err, std::abs(x.u.coeffs[i] - y.u.coeffs[i]));
    ref = std::max(ref, std::abs(x.u.coeffs[i]));
  }
  CHECK(err <= 1e-13 * ref);
  CHECK(read_time_series(part / "series.csv").rows.size() == read_time_series(full / "series.csv").rows.size());
}

TEST_CASE("restart refuses a checkpoint from a different config", "[run]") {
  const auto dir = scratch_dir("mismatch");
  auto spec = spec_from(std::string(kForced2d) + "[output]\ncheckpoint_every = 5\n");
  run_experiment(spec, dir);
  const auto other = spec_from("[grid]\nn = 16\n[time]\nsteps = 3\n");
  CHECK_THROWS_AS(run_experiment(other, dir, dir), ConfigError);
}

TEST_CASE("release windows land on the release time and store both forces", "[run]") {
  const auto dir = scratch_dir("windows");
  const auto spec = spec_from(std::string(kForced2d) + "[output]\nrelease_times = 0.105\nwindow_steps = 2\n");
  const auto sum = run_experiment(spec, dir);
  REQUIRE(sum.windows.size() == 1);
  const auto& w = sum.windows[0];
  CHECK(w.complete);
  CHECK(std::abs(w.time - 0.105) < 1e-12);
  const auto nodes = load_window(dir, read_windows(dir)[0]);
  REQUIRE(nodes.size() == 5);
  CHECK(std::abs(nodes[2].t - 0.105) < 1e-12);
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    CHECK(nodes[i].t > nodes[i - 1].t);
    // the force leaving node i-1 is the force arriving at node i
    for (std::size_t m = 0; m < nodes[i].f_before.coeffs.size(); ++m) {
      REQUIRE(std::abs(nodes[i].f_before.coeffs[m] - nodes[i - 1].f_after.coeffs[m]) < 1e-15);
    }
  }
}

TEST_CASE("a window left open by the end of the run is reported missing", "[run]") {
  const auto dir = scratch_dir("open");
  std::vector<std::string> seen;
  auto old = set_warning_sink([&](const std::string& m) { seen.push_back(m); });
  const auto spec = spec_from(std::string(kForced2d) + "[output]\nrelease_times = 0.23\nwindow_steps = 3\n");
  run_experiment(spec, dir);
  set_warning_sink(old);
  CHECK_FALSE(seen.empty());
  CHECK_THROWS_AS(load_window(dir, read_windows(dir)[0]), MissingData);
}

TEST_CASE("resolved energy budget closes over the integrated steps", "[run]") {
  const auto dir = scratch_dir("resolved");
  const auto spec = spec_from(std::string(kForced2d) + "[filter]\nscales = 3h\n[output]\nresolved_budget_steps = 20\n");
  const auto sum = run_experiment(spec, dir);
  REQUIRE(sum.resolved_budget_residual_corrected.has_value());
  CHECK(sum.resolved_budget_steps == 20);
  CHECK(*sum.resolved_budget_residual_corrected < 1e-4);
  CHECK(sum.max_budget_residual_corrected < 1e-5);
}
