#pragma once

#include <stdexcept>
#include <string>

namespace kdvbbm {

// A weight exp/cosh(sigma |xi|) would leave the double range.
class OverflowGuardError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Coefficients no longer describe a real field.
class SymmetryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Fields living on different grids were combined.
class GridMismatchError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Not enough usable data for a fit.
class InsufficientDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace kdvbbm
