#pragma once

#include <stdexcept>
#include <string>

namespace spinflow {

/// Grid too coarse for the requested spherical-harmonic band limit.
class ResolutionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Stagnation extraction was asked to handle a current with J_theta != 0.
class UnsupportedTopologyError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed simulation configuration; `field` names the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : std::runtime_error(field.empty() ? what : field + ": " + what),
        field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace spinflow
