#pragma once

#include <stdexcept>
#include <string>

namespace scobul {

/// Bad or missing configuration value. The message names the offending key.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed persisted file (events, trajectory, intervals, history, ...).
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Filesystem-level failure.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A run whose evaluation is undefined (silent network, no usable windows).
/// The optimizer maps this to a penalty fitness instead of aborting.
class DegenerateRun : public std::runtime_error {
 public:
  explicit DegenerateRun(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace scobul
