// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace gpv {

/// Invalid user-supplied parameters (grid sizes, tolerances, parameter ranges).
class ValidationError : public std::runtime_error {
public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed or truncated field files.
class FormatError : public std::runtime_error {
public:
  explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Two fields on different grids were combined.
class GridMismatchError : public std::runtime_error {
public:
  explicit GridMismatchError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A sample was NaN or infinite where a finite value is required.
class NonFiniteError : public std::runtime_error {
public:
  NonFiniteError(const std::string& msg, std::size_t index)
      : std::runtime_error(msg), index(index) {}
  std::size_t index;
};

/// An iterative solver failed to reach its tolerance.
class ConvergenceError : public std::runtime_error {
public:
  explicit ConvergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A right-hand side has a component in the operator's cokernel.
class CokernelError : public std::runtime_error {
public:
  CokernelError(const std::string& msg, double defect)
      : std::runtime_error(msg), defect(defect) {}
  double defect;
};

} // namespace gpv
