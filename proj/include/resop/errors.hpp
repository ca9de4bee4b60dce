#pragma once

/// @file errors.hpp
/// @brief Exception taxonomy shared by the library and the CLI exit codes.

#include <stdexcept>
#include <string>

namespace resop {

/// Invalid input data or configuration. CLI maps this to exit code 2.
class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure (instability, non-convergence). CLI maps this to exit code 3.
class numeric_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace resop
