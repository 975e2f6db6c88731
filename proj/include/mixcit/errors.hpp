#pragma once

#include <stdexcept>
#include <string>

namespace mixcit {

// Invalid configuration: unsupported option, bad hyperparameter, malformed
// sweep spec. Maps to a usage-level failure in the CLI.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Data violates an operation precondition: parse failures, degenerate
// columns, degenerate neighbor geometry, out-of-range arguments.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace mixcit
