#include "cascade/config.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cascade/errors.hpp"

namespace cascade {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
  }
  return true;
}

bool parse_number(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* b = s.data();
  const char* e = b + s.size();
  if (*b == '+') ++b;
  auto res = std::from_chars(b, e, out);
  return res.ec == std::errc() && res.ptr == e;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, ',')) out.push_back(trim(item));
  return out;
}

}  // namespace

Config Config::parse(std::string_view text, const std::string& source) {
  Config cfg;
  std::string section;
  int lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++lineno;
    const auto hash = raw.find('#');
    std::string line = trim(hash == std::string_view::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(source + ":" + std::to_string(lineno) + ": unterminated section header", lineno);
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (!valid_name(section)) {
        throw ConfigError(source + ":" + std::to_string(lineno) + ": bad section name '" + section + "'", lineno);
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source + ":" + std::to_string(lineno) + ": expected key = value, got '" + line + "'", lineno);
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (!valid_name(key)) throw ConfigError(source + ":" + std::to_string(lineno) + ": bad key '" + key + "'", lineno, key);
    if (section.empty()) {
      throw ConfigError(source + ":" + std::to_string(lineno) + ": key '" + key + "' appears before any [section]",
                        lineno, key);
    }
    const std::string full = section + "." + key;
    if (cfg.entries_.count(full)) {
      throw ConfigError(source + ":" + std::to_string(lineno) + ": duplicate key '" + full + "'", lineno, full);
    }
    cfg.entries_[full] = Entry{value, lineno, source};
  }
  return cfg;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse(ss.str(), path.string());
}

void Config::merge(const Config& over) {
  for (const auto& [k, e] : over.entries_) entries_[k] = e;
}

void Config::set(const std::string& key, const std::string& value, const std::string& source) {
  entries_[key] = Entry{value, 0, source};
}

void Config::erase(const std::string& key) { entries_.erase(key); }

const Config::Entry* Config::find(const std::string& key) const {
  used_[key] = true;
  auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

bool Config::has(const std::string& key) const { return entries_.count(key) > 0; }

void Config::fail(const std::string& key, const std::string& what) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError(key + ": " + what, 0, key);
  const auto& e = it->second;
  const std::string where = e.line > 0 ? e.source + ":" + std::to_string(e.line) + ": " : e.source + ": ";
  throw ConfigError(where + key + " = '" + e.value + "': " + what, e.line, key);
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  const Entry* e = find(key);
  return e ? e->value : fallback;
}

double Config::get_double(const std::string& key, double fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  double v;
  if (!parse_number(e->value, v)) fail(key, "expected a number");
  return v;
}

std::int64_t Config::get_int(const std::string& key, std::int64_t fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  std::int64_t v = 0;
  const char* b = e->value.data();
  const char* end = b + e->value.size();
  auto res = std::from_chars(b, end, v);
  if (res.ec != std::errc() || res.ptr != end) fail(key, "expected an integer");
  return v;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  if (e->value == "true" || e->value == "yes" || e->value == "1") return true;
  if (e->value == "false" || e->value == "no" || e->value == "0") return false;
  fail(key, "expected true or false");
}

std::vector<double> Config::get_doubles(const std::string& key, const std::vector<double>& fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  std::vector<double> out;
  if (trim(e->value).empty()) return out;
  for (const auto& item : split_list(e->value)) {
    double v;
    if (!parse_number(item, v)) fail(key, "expected a comma-separated list of numbers");
    out.push_back(v);
  }
  return out;
}

double Config::get_length(const std::string& key, double fallback, double spacing) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  std::string s = e->value;
  double factor = 1.0;
  if (!s.empty() && s.back() == 'h') {
    s.pop_back();
    factor = spacing;
  }
  double v;
  if (!parse_number(trim(s), v)) fail(key, "expected a length (number, or multiple of h such as 8h)");
  return v * factor;
}

std::vector<double> Config::get_lengths(const std::string& key, const std::vector<double>& fallback,
                                        double spacing) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  std::vector<double> out;
  for (std::string item : split_list(e->value)) {
    double factor = 1.0;
    if (!item.empty() && item.back() == 'h') {
      item.pop_back();
      factor = spacing;
    }
    double v;
    if (!parse_number(trim(item), v)) fail(key, "expected a comma-separated list of lengths");
    out.push_back(v * factor);
  }
  return out;
}

void Config::reject_unknown() const {
  for (const auto& [k, e] : entries_) {
    if (!used_.count(k)) fail(k, "unknown key");
  }
}

std::string Config::canonical(const std::vector<std::string>& skip) const {
  std::string out;
  for (const auto& [k, e] : entries_) {
    bool skipped = false;
    for (const auto& s : skip) skipped = skipped || s == k;
    if (!skipped) out += k + "=" + e.value + "\n";
  }
  return out;
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace cascade
