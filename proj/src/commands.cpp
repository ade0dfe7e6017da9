#include "cascade/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cascade/diagnostics.hpp"
#include "cascade/errors.hpp"
#include "cascade/log.hpp"
#include "cascade/run.hpp"
#include "cascade/tracers.hpp"

namespace cascade {
namespace {

std::ofstream open_csv(const std::filesystem::path& p, const std::string& hash) {
  std::ofstream os(p, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  os << "# config_hash=" << hash << "\n";
  return os;
}

std::vector<double> geometric(double lo, double hi, int count) {
  std::vector<double> out;
  if (count <= 1 || !(hi > lo)) return {lo};
  for (int i = 0; i < count; ++i) out.push_back(lo * std::pow(hi / lo, double(i) / (count - 1)));
  return out;
}

std::string opt_str(const std::optional<double>& v) { return v ? format_double(*v) : "unavailable"; }

}  // namespace

std::string sectioned_config(const std::string& canonical) {
  std::istringstream is(canonical);
  std::string line, section, out;
  while (std::getline(is, line)) {
    const auto dot = line.find('.');
    const auto eq = line.find('=');
    if (dot == std::string::npos || eq == std::string::npos || dot > eq) continue;
    const std::string sec = line.substr(0, dot);
    if (sec != section) {
      out += "[" + sec + "]\n";
      section = sec;
    }
    out += line.substr(dot + 1, eq - dot - 1) + " = " + line.substr(eq + 1) + "\n";
  }
  return out;
}

void diagnose(const ExperimentSpec& spec, const std::filesystem::path& run_dir, const std::filesystem::path& out,
              const DiagnoseOptions& opt) {
  namespace fs = std::filesystem;
  fs::create_directories(out);
  const std::string& hash = spec.config_hash;

  // spectra of every stored state
  std::vector<std::pair<std::int64_t, fs::path>> states;
  if (fs::exists(run_dir / "snapshots")) {
    for (const auto& entry : fs::directory_iterator(run_dir / "snapshots")) {
      const std::string name = entry.path().filename().string();
      if (name.rfind("step_", 0) != 0) continue;
      states.emplace_back(std::stoll(name.substr(5, name.find('.') - 5)), entry.path());
    }
  }
  std::sort(states.begin(), states.end());
  if (!fs::exists(run_dir / "checkpoint.bin")) throw MissingData("no final state (checkpoint.bin) in " + run_dir.string());
  const std::int64_t last = std::stoll(read_key_values(run_dir / "checkpoint.txt").at("step"));
  if (states.empty() || states.back().first != last) states.emplace_back(last, run_dir / "checkpoint.bin");
  {
    auto os = open_csv(out / "spectra.csv", hash);
    os << "step,t,k,energy\n";
    for (const auto& [step, path] : states) {
      const auto snap = read_flow_snapshot(path);
      const auto sp = energy_spectrum(snap.u, snap.t);
      for (std::size_t i = 0; i < sp.k.size(); ++i) {
        os << step << "," << format_double(sp.t) << "," << format_double(sp.k[i]) << "," << format_double(sp.energy[i])
           << "\n";
      }
    }
  }

  const fs::path chosen = opt.step < 0 ? run_dir / "checkpoint.bin" : snapshot_path(run_dir, opt.step);
  if (!fs::exists(chosen)) throw MissingData("no stored snapshot " + chosen.string());
  const FlowSnapshot snap = read_flow_snapshot(chosen);
  const Grid& g = snap.grid;
  const double h = g.spacing();
  FlowState s(g, snap.nu, spec.friction);
  s.u = snap.u;
  s.f = snap.f_before;
  s.f += snap.f_after;
  s.f *= 0.5;
  s.t = snap.t;

  const auto& dg = spec.diagnostics;
  std::vector<double> rs;
  if (dg.inertial_min > 0.0 && dg.inertial_max > 0.0) {
    rs = geometric(dg.inertial_min, dg.inertial_max, dg.structure_points);
  } else if (!spec.scales.empty()) {
    rs = spec.scales;
  } else {
    rs = geometric(2.0 * h, g.length() / 4.0, dg.structure_points);
  }

  {
    const auto rule = make_direction_rule(g.dim, g.dim == 2 ? 32 : 64);
    const auto s3 = structure_function_3L(s.u, rs);
    auto os = open_csv(out / "structure.csv", hash);
    os << "# t=" << format_double(s.t) << "\n";
    os << "r,s2,s3l\n";
    for (std::size_t i = 0; i < rs.size(); ++i) {
      double s2 = 0.0;
      for (std::size_t j = 0; j < rule.directions.size(); ++j) {
        Vec3 r = rule.directions[j];
        for (auto& c : r) c *= rs[i];
        s2 += rule.weights[j] * structure_function_2(s.u, r);
      }
      os << format_double(rs[i]) << "," << format_double(s2) << "," << format_double(s3[i]) << "\n";
    }
  }
  {
    std::vector<double> rf;
    for (double r : rs) {
      if (r >= 2.0 * h) rf.push_back(r);
    }
    const auto table = four_fifths_check(s.u, rf, spec.filter_profile);
    auto os = open_csv(out / "four_fifths.csv", hash);
    os << "# dim=" << table.dim << " coefficient=" << format_double(table.coefficient)
       << " floor=" << format_double(table.floor) << "\n";
    os << "# compared as window averages; the flux/structure identity need not hold pointwise\n";
    os << "r,s3l,mean_flux,predicted,ratio,indeterminate\n";
    for (const auto& row : table.rows) {
      os << format_double(row.r) << "," << format_double(row.s3l) << "," << format_double(row.mean_flux) << ","
         << format_double(row.predicted) << "," << (row.indeterminate ? "nan" : format_double(row.ratio)) << ","
         << (row.indeterminate ? 1 : 0) << "\n";
    }
  }
  std::vector<double> ells = spec.scales;
  if (ells.empty()) {
    for (double r : rs) {
      if (r >= 2.0 * h && (ells.empty() || r > ells.back())) ells.push_back(r);
    }
  }
  {
    const auto fp = flux_profile(s, ells, spec.filter_profile);
    auto os = open_csv(out / "flux.csv", hash);
    os << "# dissipation=" << format_double(fp.dissipation) << " input=" << format_double(fp.input) << "\n";
    os << "ell,mean_flux,turnover\n";
    for (std::size_t i = 0; i < fp.ell.size(); ++i) {
      os << format_double(fp.ell[i]) << "," << format_double(fp.mean_flux[i]) << "," << format_double(fp.turnover[i])
         << "\n";
    }
  }
  {
    const double radius = spec.scales.empty() ? 0.0 : spec.dispersion.radius_factor * spec.scales.back();
    const auto rep = scale_report(s, spec.scales, radius);
    KeyValues kv;
    kv["config_hash"] = hash;
    kv["t"] = format_double(s.t);
    kv["energy"] = format_double(rep.energy);
    kv["dissipation"] = format_double(rep.dissipation);
    kv["kolmogorov_length"] = opt_str(rep.kolmogorov_length);
    kv["kolmogorov_time"] = opt_str(rep.kolmogorov_time);
    kv["integral_scale"] = format_double(rep.integral_scale);
    kv["rms_velocity"] = format_double(rep.rms_velocity);
    kv["reynolds"] = opt_str(rep.reynolds);
    for (std::size_t i = 0; i < ells.size(); ++i) {
      kv["turnover." + std::to_string(i)] =
          format_double(ells[i]) + " " + format_double(turnover_time(mollify(s.u, make_filter_kernel(g, spec.filter_profile, ells[i])), ells[i]));
    }
    for (std::size_t i = 0; i < rep.warnings.size(); ++i) kv["warning." + std::to_string(i)] = rep.warnings[i];
    write_key_values(out / "scales.txt", kv, "scale report (turnover.i = ell tau_ell)");
  }
}

const std::vector<std::string>& merged_quantities() {
  static const std::vector<std::string> q = {"a0",          "om_lagrangian_half", "om_eulerian_half",
                                             "om_torus_half", "minus_mean_flux",  "minus_dissipation",
                                             "input",       "tau_ell",            "fit_residual"};
  return q;
}

ReportSummary merge_reports(const std::vector<std::filesystem::path>& inputs) {
  namespace fs = std::filesystem;
  std::vector<fs::path> files;
  for (const auto& in : inputs) {
    if (fs::is_directory(in)) {
      for (const auto& e : fs::directory_iterator(in)) {
        const std::string name = e.path().filename().string();
        if (name.rfind("report_", 0) == 0 && e.path().extension() == ".txt") files.push_back(e.path());
      }
    } else if (fs::exists(in)) {
      files.push_back(in);
    } else {
      throw MissingData("no such report: " + in.string());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw MissingData("no report files found");

  ReportSummary out;
  std::map<std::string, std::vector<KeyValues>> by_scale;
  for (const auto& f : files) {
    const KeyValues kv = read_key_values(f);
    if (!kv.count("kind") || kv.at("kind") != "anomaly_report") throw MissingData(f.string() + " is not an anomaly report");
    const int dim = std::stoi(kv.at("dim"));
    const int n = std::stoi(kv.at("n"));
    if (out.reports == 0) {
      out.config_hash = kv.at("config_hash");
      out.dim = dim;
      out.n = n;
    } else {
      if (dim != out.dim || n != out.n) {
        throw ConfigError("report " + f.string() + " is on a " + std::to_string(n) + "^" + std::to_string(dim) +
                          " grid, earlier reports on " + std::to_string(out.n) + "^" + std::to_string(out.dim));
      }
      if (kv.at("config_hash") != out.config_hash) {
        throw ConfigError("report " + f.string() + " has config hash " + kv.at("config_hash") + ", expected " +
                          out.config_hash);
      }
    }
    ++out.reports;
    by_scale[kv.at("ell")].push_back(kv);
  }
  for (const auto& [ell, list] : by_scale) {
    MergedScale m;
    m.ell = std::stod(ell);
    m.radius = std::stod(list.front().at("radius"));
    std::map<std::string, std::vector<double>> samples;
    for (const auto& kv : list) {
      auto num = [&](const char* k) { return std::stod(kv.at(k)); };
      samples["a0"].push_back(num("a0"));
      samples["om_lagrangian_half"].push_back(0.5 * num("om_lagrangian"));
      samples["om_eulerian_half"].push_back(0.5 * num("om_eulerian"));
      samples["om_torus_half"].push_back(0.5 * num("om_eulerian_torus"));
      samples["minus_mean_flux"].push_back(-num("mean_flux"));
      samples["minus_dissipation"].push_back(-num("dissipation"));
      samples["input"].push_back(num("input"));
      samples["tau_ell"].push_back(num("tau_ell"));
      samples["fit_residual"].push_back(num("fit_residual"));
      for (const auto& [k, v] : kv) {
        if (k.rfind("warning.", 0) == 0 && std::find(m.warnings.begin(), m.warnings.end(), v) == m.warnings.end()) {
          m.warnings.push_back(v);
        }
      }
    }
    for (const auto& [name, xs] : samples) {
      MergedValue v;
      v.count = xs.size();
      for (double x : xs) v.mean += x;
      v.mean /= double(xs.size());
      if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - v.mean) * (x - v.mean);
        v.stderr_ = std::sqrt(ss / double(xs.size() - 1) / double(xs.size()));
      }
      m.values[name] = v;
    }
    out.scales.push_back(std::move(m));
  }
  std::sort(out.scales.begin(), out.scales.end(), [](const auto& a, const auto& b) { return a.ell < b.ell; });
  return out;
}

std::string format_summary(const ReportSummary& s) {
  std::ostringstream os;
  char buf[160];
  os << "config " << s.config_hash << ", " << s.n << "^" << s.dim << " grid, " << s.reports << " report(s)\n";
  os << "anomaly estimates on the A0 scale (mean +- stderr over release times):\n";
  for (const auto& m : s.scales) {
    std::snprintf(buf, sizeof(buf), "\nl = %.6g, R = %.6g, releases = %zu\n", m.ell, m.radius,
                  m.values.at("a0").count);
    os << buf;
    for (const auto& q : merged_quantities()) {
      const auto& v = m.values.at(q);
      std::snprintf(buf, sizeof(buf), "  %-20s % .6e +- %.2e\n", q.c_str(), v.mean, v.stderr_);
      os << buf;
    }
    for (const auto& w : m.warnings) os << "  warning: " << w << "\n";
  }
  return os.str();
}

void write_summary(const std::filesystem::path& out, const ReportSummary& s) {
  std::filesystem::create_directories(out);
  {
    std::ofstream os(out / "summary.txt", std::ios::trunc);
    os << format_summary(s);
  }
  std::ofstream os(out / "summary.csv", std::ios::trunc);
  os << "# config_hash=" << s.config_hash << "\n";
  os << "ell,R,releases";
  for (const auto& q : merged_quantities()) os << "," << q << "," << q << "_stderr";
  os << "\n";
  for (const auto& m : s.scales) {
    os << format_double(m.ell) << "," << format_double(m.radius) << "," << m.values.at("a0").count;
    for (const auto& q : merged_quantities()) {
      os << "," << format_double(m.values.at(q).mean) << "," << format_double(m.values.at(q).stderr_);
    }
    os << "\n";
  }
}

}  // namespace cascade
