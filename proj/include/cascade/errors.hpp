// Exception types shared by the library and the command-line front end.
#pragma once

#include <stdexcept>
#include <string>

namespace cascade {

/// Malformed or inconsistent configuration. Carries the offending line when
/// the error came from a config file (0 otherwise).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line = 0, std::string key = {})
      : std::runtime_error(what), line_(line), key_(std::move(key)) {}
  int line() const { return line_; }
  const std::string& key() const { return key_; }

 private:
  int line_;
  std::string key_;
};

/// Non-finite values appeared during integration.
class NumericalAbort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Requested data (snapshots, lags, report files) is not available.
class MissingData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Time step above the advective limit; suggested_dt satisfies it.
class CflViolation : public std::invalid_argument {
 public:
  CflViolation(const std::string& what, double suggested)
      : std::invalid_argument(what), suggested_dt(suggested) {}
  double suggested_dt;
};

}  // namespace cascade
