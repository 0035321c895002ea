#pragma once

#include <stdexcept>
#include <string>

namespace lowrank {

/// Raised when a caller passes arguments outside an operation's domain.
class ParameterError : public std::invalid_argument {
 public:
  explicit ParameterError(const std::string& what) : std::invalid_argument(what) {}
};

/// Raised when a computation produces non-finite values or a decomposition fails.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace lowrank
