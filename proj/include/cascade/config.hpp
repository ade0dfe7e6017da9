// Sectioned key=value configuration files.
//
//   # comment
//   [section]
//   key = value   # trailing comment
//
// Keys are addressed as "section.key". Every value keeps the line it came
// from so type errors and unknown keys can be reported precisely.
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace cascade {

class Config {
 public:
  struct Entry {
    std::string value;
    int line = 0;
    std::string source;
  };

  /// Throws ConfigError with the line number on malformed input.
  static Config parse(std::string_view text, const std::string& source = "<config>");
  static Config load(const std::filesystem::path& path);

  /// Later layers win; used for preset + file + command-line overrides.
  void merge(const Config& over);
  void set(const std::string& key, const std::string& value, const std::string& source = "<override>");
  void erase(const std::string& key);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;
  /// Lengths accept a trailing "h" meaning multiples of `spacing`.
  double get_length(const std::string& key, double fallback, double spacing) const;
  std::vector<double> get_lengths(const std::string& key, const std::vector<double>& fallback, double spacing) const;

  /// Throws ConfigError naming the first key never read through a getter.
  void reject_unknown() const;

  /// Sorted "key=value" lines, excluding `skip` keys.
  std::string canonical(const std::vector<std::string>& skip = {}) const;

  const std::map<std::string, Entry>& entries() const { return entries_; }

 private:
  const Entry* find(const std::string& key) const;
  [[noreturn]] void fail(const std::string& key, const std::string& what) const;

  std::map<std::string, Entry> entries_;
  mutable std::map<std::string, bool> used_;
};

std::uint64_t fnv1a64(std::string_view data);
std::string hex64(std::uint64_t v);

}  // namespace cascade
