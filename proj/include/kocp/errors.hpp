#pragma once

#include <stdexcept>
#include <string>

namespace kocp {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed or inconsistent input (bad dimensions, unsupported family,
/// out-of-range indices, size caps, dependent equality rows). CLI exit 3.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Numerical breakdown (eigensolver non-convergence, singular Newton
/// systems after regularization, Newton divergence). CLI exit 2.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A barrier was evaluated outside the strict interior of its cone.
class NotInteriorError : public InputError {
 public:
  using InputError::InputError;
};

}  // namespace kocp
