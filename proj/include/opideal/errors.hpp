#pragma once

#include <stdexcept>
#include <string>

namespace opideal {

/// Precondition violation on an operation's inputs (shape, range, tag).
class DomainError : public std::invalid_argument {
 public:
  explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

/// Invalid experiment configuration or command line; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace opideal
