#pragma once

#include <stdexcept>
#include <string>

namespace polyq {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Caller passed structurally invalid data (shape mismatch, bad simplex
/// weights, non-finite entries, ...).
class InvalidInputError : public Error {
 public:
  explicit InvalidInputError(const std::string& what) : Error(what) {}
};

/// An algorithm failed to converge or produced unusable numbers.
class NumericalFailureError : public Error {
 public:
  explicit NumericalFailureError(const std::string& what) : Error(what) {}
};

/// A matrix required to be positive definite was not.
class NotPositiveDefiniteError : public Error {
 public:
  explicit NotPositiveDefiniteError(const std::string& what) : Error(what) {}
};

/// A file could not be parsed against the documented schema.
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what) : Error(what) {}
};

}  // namespace polyq
