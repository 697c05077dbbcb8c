#pragma once

#include <stdexcept>
#include <string>

namespace layered_ot {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid scenario parameters or config file contents.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Caller violated an operation precondition (arity, coincident points, ...).
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Function evaluated outside its differentiability domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The simplex did not reach a certified optimum.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// Instance exceeds a configured size cap.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Input data is inconsistent (e.g. an untagged support partner).
class DataError : public Error {
 public:
  using Error::Error;
};

/// A plan does not have the structure an operation requires.
class StructureViolation : public Error {
 public:
  using Error::Error;
};

/// Requested geometry is not supported.
class UnsupportedShape : public Error {
 public:
  using Error::Error;
};

}  // namespace layered_ot
