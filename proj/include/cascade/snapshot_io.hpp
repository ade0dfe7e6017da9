// Binary snapshot files and key=value manifests.
//
// Snapshot layout (little-endian): "CSCD", u32 version, u32 dim, u32 n,
// f64 t, f64 nu, u32 field count, then each scalar field block as n^dim
// f64 values in row-major order.
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "cascade/grid.hpp"

namespace cascade {

inline constexpr std::uint32_t kSnapshotVersion = 1;

struct Snapshot {
  Grid grid;
  double t = 0.0;
  double nu = 0.0;
  std::vector<PhysicalField> fields;  // each rank >= 0; written component by component
};

/// Velocity snapshot with the force used before and after t.
struct FlowSnapshot {
  Grid grid;
  double t = 0.0;
  double nu = 0.0;
  SpectralField u, f_before, f_after;
};

void write_snapshot(const std::filesystem::path& path, const Snapshot& s);
/// `ranks` gives the rank of each field to reassemble; an empty list reads
/// every block as a scalar.
Snapshot read_snapshot(const std::filesystem::path& path, const std::vector<int>& ranks = {});

void write_flow_snapshot(const std::filesystem::path& path, const FlowSnapshot& s);
FlowSnapshot read_flow_snapshot(const std::filesystem::path& path);

/// Header only; cheap.
struct SnapshotHeader {
  std::uint32_t version = 0;
  int dim = 0;
  int n = 0;
  double t = 0.0;
  double nu = 0.0;
  std::uint32_t field_count = 0;
};
SnapshotHeader read_snapshot_header(const std::filesystem::path& path);

using KeyValues = std::map<std::string, std::string>;

void write_key_values(const std::filesystem::path& path, const KeyValues& kv,
                      const std::string& header_comment = {});
KeyValues read_key_values(const std::filesystem::path& path);

/// Shortest round-trip representation of a double.
std::string format_double(double v);

}  // namespace cascade
