#pragma once

#include <stdexcept>

namespace sirnet {

/// A parameter outside the domain an operation is defined on.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An iterative method hit its iteration cap without meeting its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sirnet
