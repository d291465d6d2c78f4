#pragma once

#include <stdexcept>
#include <string>

namespace qshear {

/// Invalid user-facing configuration (parameters, option values, config keys).
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// A state lies outside the domain of a chart or formula (S1 = S2, x = 1/6, ...).
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

}  // namespace qshear
