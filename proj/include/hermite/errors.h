#pragma once

#include <stdexcept>
#include <string>

namespace hermite {

// Bad input: out-of-domain parameters, malformed grids, missing config keys.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical procedure could not meet its contract (quadrature budget,
// singular matrix, solver instability).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Files that cannot be read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hermite
