#include "cascade/snapshot_io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "cascade/errors.hpp"
#include "cascade/fft.hpp"

namespace cascade {
namespace {

static_assert(std::endian::native == std::endian::little, "snapshot I/O assumes a little-endian host");

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is, const std::filesystem::path& path) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) {
    throw MissingData("truncated snapshot file " + path.string());
  }
  return v;
}

SnapshotHeader read_header(std::istream& is, const std::filesystem::path& path) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "CSCD", 4) != 0) {
    throw MissingData("not a snapshot file: " + path.string());
  }
  SnapshotHeader h;
  h.version = get<std::uint32_t>(is, path);
  if (h.version != kSnapshotVersion) {
    throw MissingData("unsupported snapshot version " + std::to_string(h.version) + " in " + path.string());
  }
  h.dim = static_cast<int>(get<std::uint32_t>(is, path));
  h.n = static_cast<int>(get<std::uint32_t>(is, path));
  h.t = get<double>(is, path);
  h.nu = get<double>(is, path);
  h.field_count = get<std::uint32_t>(is, path);
  return h;
}

}  // namespace

void write_snapshot(const std::filesystem::path& path, const Snapshot& s) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + tmp + " for writing");
    os.write("CSCD", 4);
    put<std::uint32_t>(os, kSnapshotVersion);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(s.grid.dim));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(s.grid.n));
    put<double>(os, s.t);
    put<double>(os, s.nu);
    std::uint32_t count = 0;
    for (const auto& f : s.fields) count += static_cast<std::uint32_t>(f.components());
    put<std::uint32_t>(os, count);
    for (const auto& f : s.fields) {
      os.write(reinterpret_cast<const char*>(f.values.data()),
               static_cast<std::streamsize>(f.values.size() * sizeof(double)));
    }
    if (!os) throw std::runtime_error("write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

SnapshotHeader read_snapshot_header(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw MissingData("cannot open snapshot " + path.string());
  return read_header(is, path);
}

Snapshot read_snapshot(const std::filesystem::path& path, const std::vector<int>& ranks) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw MissingData("cannot open snapshot " + path.string());
  const SnapshotHeader h = read_header(is, path);
  Snapshot s;
  s.grid = Grid(h.dim, h.n);
  s.t = h.t;
  s.nu = h.nu;
  std::vector<int> layout = ranks;
  if (layout.empty()) layout.assign(h.field_count, 0);
  std::uint32_t blocks = 0;
  for (int r : layout) blocks += static_cast<std::uint32_t>(component_count(h.dim, r));
  if (blocks != h.field_count) {
    throw MissingData("snapshot " + path.string() + " has " + std::to_string(h.field_count) +
                      " field blocks, expected " + std::to_string(blocks));
  }
  for (int r : layout) {
    PhysicalField f(s.grid, r);
    if (!is.read(reinterpret_cast<char*>(f.values.data()),
                 static_cast<std::streamsize>(f.values.size() * sizeof(double)))) {
      throw MissingData("truncated snapshot file " + path.string());
    }
    s.fields.push_back(std::move(f));
  }
  return s;
}

void write_flow_snapshot(const std::filesystem::path& path, const FlowSnapshot& s) {
  Snapshot out{s.grid, s.t, s.nu, {}};
  out.fields.push_back(inverse_transform(s.u));
  out.fields.push_back(inverse_transform(s.f_after));
  out.fields.push_back(inverse_transform(s.f_before));
  write_snapshot(path, out);
}

FlowSnapshot read_flow_snapshot(const std::filesystem::path& path) {
  Snapshot in = read_snapshot(path, {1, 1, 1});
  FlowSnapshot s;
  s.grid = in.grid;
  s.t = in.t;
  s.nu = in.nu;
  s.u = forward_transform(in.fields[0]);
  s.f_after = forward_transform(in.fields[1]);
  s.f_before = forward_transform(in.fields[2]);
  return s;
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_key_values(const std::filesystem::path& path, const KeyValues& kv, const std::string& header_comment) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  if (!header_comment.empty()) {
    std::istringstream lines(header_comment);
    std::string line;
    while (std::getline(lines, line)) os << "# " << line << '\n';
  }
  for (const auto& [k, v] : kv) os << k << '=' << v << '\n';
}

KeyValues read_key_values(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw MissingData("cannot open " + path.string());
  KeyValues kv;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

}  // namespace cascade
