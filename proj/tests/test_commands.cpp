#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "cascade/commands.hpp"
#include "cascade/disperse.hpp"
#include "cascade/errors.hpp"
#include "cascade/run.hpp"

using namespace cascade;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("cascade_cmd_" + name);
  fs::remove_all(p);
  return p;
}

ExperimentSpec spec_from(const std::string& text) { return load_experiment(Config::parse(text)); }

// rows of a csv after comment lines, keyed by header names
std::vector<std::map<std::string, double>> read_csv(const fs::path& p) {
  std::ifstream is(p);
  std::string line;
  std::vector<std::string> cols;
  std::vector<std::map<std::string, double>> rows;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string cell;
    if (cols.empty()) {
      while (std::getline(ss, cell, ',')) cols.push_back(cell);
      continue;
    }
    std::map<std::string, double> row;
    for (std::size_t c = 0; std::getline(ss, cell, ','); ++c) row[cols[c]] = std::stod(cell);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

TEST_CASE("sectioned config round-trips the canonical form", "[commands]") {
  const auto spec = load_experiment(layered_config(std::nullopt, std::string("inverse2d")));
  const auto again = load_experiment(Config::parse(sectioned_config(spec.canonical)));
  CHECK(again.canonical == spec.canonical);
  CHECK(again.config_hash == spec.config_hash);
}

TEST_CASE("spectra shell sums match the energy column of the time series", "[commands]") {
  const auto dir = scratch_dir("spectra");
  const auto spec = spec_from(
      "[grid]\nn = 32\n[flow]\nnu = 0.02\n[initial]\nkind = random\nkmax = 4\n[time]\ndt = 0.01\nsteps = 6\n"
      "[forcing]\nkind = shell\nk_f = 4\ninput_rate = 0.1\n[output]\nsnapshot_every = 2\n");
  run_experiment(spec, dir);
  diagnose(spec, dir, dir / "diag");
  const auto ts = read_time_series(dir / "series.csv");
  const auto steps = ts.column("step");
  const auto energy = ts.column("energy");
  std::map<long long, double> shell_sum;
  for (const auto& row : read_csv(dir / "diag" / "spectra.csv")) shell_sum[std::llround(row.at("step"))] += row.at("energy");
  REQUIRE(shell_sum.size() == 4);
  for (const auto& [step, e] : shell_sum) {
    std::size_t i = 0;
    while (std::llround(steps[i]) != step) ++i;
    INFO("step " << step);
    CHECK(std::abs(e - energy[i]) <= 1e-8 * energy[i]);
  }
}

TEST_CASE("diagnostics of a zero field are all zero", "[commands]") {
  const auto dir = scratch_dir("zero");
  const auto spec = spec_from("[grid]\nn = 16\n[time]\nsteps = 2\n[filter]\nscales = 2h, 3h\n");
  run_experiment(spec, dir);
  diagnose(spec, dir, dir / "diag");
  for (const auto& row : read_csv(dir / "diag" / "spectra.csv")) CHECK(row.at("energy") == 0.0);
  for (const auto& row : read_csv(dir / "diag" / "structure.csv")) {
    CHECK(row.at("s2") == 0.0);
    CHECK(row.at("s3l") == 0.0);
  }
  for (const auto& row : read_csv(dir / "diag" / "flux.csv")) CHECK(row.at("mean_flux") == 0.0);
  for (const auto& row : read_csv(dir / "diag" / "four_fifths.csv")) CHECK(row.at("indeterminate") == 1.0);
}

TEST_CASE("four-fifths table header carries the 3D coefficient", "[commands]") {
  const auto dir = scratch_dir("ff3");
  const auto spec = spec_from(
      "[grid]\ndim = 3\nn = 16\n[initial]\nkind = random\nkmax = 2\n[time]\nsteps = 0\n[filter]\nscales = 2h, 3h\n");
  run_experiment(spec, dir);
  diagnose(spec, dir, dir / "diag");
  std::ifstream is(dir / "diag" / "four_fifths.csv");
  std::string l1, l2;
  std::getline(is, l1);
  std::getline(is, l2);
  CHECK(l2.find("coefficient=-0.8 ") != std::string::npos);
}

TEST_CASE("frozen uniform field gives an all-zero report", "[commands]") {
  const auto dir = scratch_dir("uniform");
  const auto spec = spec_from(
      "[grid]\nn = 32\n[initial]\nkind = uniform\nvelocity = 0.3, -0.2\n[time]\ndt = 0.01\nsteps = 4\n"
      "[output]\nrelease_times = 0.02\nwindow_steps = 2\n[filter]\nscales = 3h\n"
      "[dispersion]\nfrozen = true\nradius_factor = 2\n");
  run_experiment(spec, dir);
  const auto reports = disperse(spec, dir);
  REQUIRE(reports.size() == 1);
  const auto& r = reports[0];
  CHECK(r.fit.a0 == 0.0);
  CHECK(r.om_lagrangian == 0.0);
  CHECK(r.om_eulerian == 0.0);
  CHECK(r.om_eulerian_torus == 0.0);
  CHECK(r.mean_flux == 0.0);
  CHECK(r.dissipation == 0.0);
  CHECK(r.input == 0.0);
}

TEST_CASE("disperse needs snapshots covering the largest lag", "[commands]") {
  const auto dir = scratch_dir("short");
  const auto spec = spec_from(
      "[grid]\nn = 32\n[initial]\nkind = random\nkmax = 3\n[time]\ndt = 0.01\nsteps = 6\n"
      "[output]\nrelease_times = 0.03\nwindow_steps = 2\n[filter]\nscales = 3h\n[dispersion]\nradius_factor = 2\n");
  run_experiment(spec, dir);
  CHECK_THROWS_AS(disperse(spec, dir), MissingData);
}

TEST_CASE("report merging: echo, zero spread and refusals", "[commands]") {
  const auto dir = scratch_dir("reports");
  AnomalyReport r;
  r.config_hash = "00000000000000aa";
  r.dim = 2;
  r.n = 64;
  r.ell = 0.5;
  r.radius = 1.5;
  r.tau_ell = 2.0;
  r.fit.a0 = 0.125;
  r.fit.residual = 0.01;
  r.om_lagrangian = 0.3;
  r.om_eulerian = 0.26;
  r.om_eulerian_torus = 0.24;
  r.mean_flux = -0.11;
  r.dissipation = 0.02;
  r.input = 0.1;
  write_anomaly_report(dir / "a", r);
  const auto one = merge_reports({dir / "a"});
  REQUIRE(one.scales.size() == 1);
  CHECK(one.scales[0].values.at("a0").mean == 0.125);
  CHECK(one.scales[0].values.at("om_lagrangian_half").mean == 0.15);
  CHECK(one.scales[0].values.at("minus_mean_flux").mean == 0.11);
  CHECK(one.scales[0].values.at("a0").stderr_ == 0.0);

  r.release_index = 1;
  write_anomaly_report(dir / "a", r);
  const auto two = merge_reports({dir / "a"});
  CHECK(two.reports == 2);
  for (const auto& [name, v] : two.scales[0].values) {
    INFO(name);
    CHECK(v.count == 2);
    CHECK(v.stderr_ == 0.0);
  }

  AnomalyReport other = r;
  other.config_hash = "00000000000000bb";
  write_anomaly_report(dir / "b", other);
  CHECK_THROWS_AS(merge_reports({dir / "a", dir / "b"}), ConfigError);
  other = r;
  other.n = 128;
  write_anomaly_report(dir / "c", other);
  CHECK_THROWS_AS(merge_reports({dir / "a", dir / "c"}), ConfigError);
  CHECK_THROWS_AS(merge_reports({dir / "missing"}), MissingData);
}

TEST_CASE("dispersion reports are byte-identical across repeats", "[commands]") {
  const auto dir = scratch_dir("det");
  auto spec = load_experiment(layered_config(std::nullopt, std::string("shear_null")));
  run_experiment(spec, dir);
  const auto a = disperse(spec, dir);
  spec.threads = 2;
  const auto b = disperse(spec, dir);
  write_anomaly_report(dir / "a", a[0]);
  write_anomaly_report(dir / "b", b[0]);
  auto slurp = [](const fs::path& p) {
    std::ifstream is(p);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
  };
  CHECK(slurp(dir / "a" / "report_0_0.txt") == slurp(dir / "b" / "report_0_0.txt"));
  CHECK(slurp(dir / "a" / "dispersion_0_0.csv") == slurp(dir / "b" / "dispersion_0_0.csv"));
}
