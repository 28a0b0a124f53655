#pragma once

#include <stdexcept>
#include <string>

namespace gpsplit {

/// Invalid configuration or argument supplied by the caller.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A trajectory left the finite / bounded regime.
class DivergenceError : public std::runtime_error {
 public:
  explicit DivergenceError(const std::string& what, int stage = -1)
      : std::runtime_error(what), stage_(stage) {}
  /// Index of the splitting stage that produced the failure, or -1.
  int stage() const noexcept { return stage_; }

 private:
  int stage_;
};

/// Step-size controller gave up (too many rejections or step below tau_min).
class ControllerError : public DivergenceError {
 public:
  using DivergenceError::DivergenceError;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gpsplit
