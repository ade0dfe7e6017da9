// Library side of the command-line subcommands that are not plain runs:
// post-run diagnostics and merging of anomaly reports.
#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "cascade/experiment.hpp"
#include "cascade/snapshot_io.hpp"

namespace cascade {

/// Sectioned config text equivalent to a canonical "section.key=value" list.
std::string sectioned_config(const std::string& canonical);

struct DiagnoseOptions {
  std::int64_t step = -1;  // snapshot for structure functions and flux; -1 = final state
};

/// Writes into `out`:
///   spectra.csv      step,t,k,energy for every stored snapshot and the final state
///   structure.csv    r,s2,s3l on the analysed state
///   four_fifths.csv  the 4/5 comparison, coefficient in the header
///   flux.csv         ell,mean_flux,turnover plus dissipation and input
///   scales.txt       scale report
void diagnose(const ExperimentSpec& spec, const std::filesystem::path& run_dir, const std::filesystem::path& out,
              const DiagnoseOptions& opt = {});

struct MergedValue {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t count = 0;
};

struct MergedScale {
  double ell = 0.0;
  double radius = 0.0;
  std::map<std::string, MergedValue> values;
  std::vector<std::string> warnings;
};

struct ReportSummary {
  std::string config_hash;
  int dim = 0;
  int n = 0;
  std::size_t reports = 0;
  std::vector<MergedScale> scales;  // increasing ell
};

/// Quantities merged per scale, in table order.
const std::vector<std::string>& merged_quantities();

/// Accepts report files or directories holding report_*.txt. Throws
/// ConfigError on mixed config hashes or grids, MissingData when nothing is
/// found.
ReportSummary merge_reports(const std::vector<std::filesystem::path>& inputs);

std::string format_summary(const ReportSummary& s);
void write_summary(const std::filesystem::path& out, const ReportSummary& s);

}  // namespace cascade
