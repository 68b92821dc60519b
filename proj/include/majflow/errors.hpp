#pragma once

#include <stdexcept>
#include <string>

namespace majflow {

// Bad arguments or data that fail a documented precondition.
class invalid_input : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A computation that ran but could not produce a trustworthy number
// (non-convergence, lost positivity, degenerate spectra, ...).
class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace majflow
