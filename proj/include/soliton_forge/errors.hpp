#pragma once

#include <stdexcept>
#include <string>

namespace soliton_forge {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or out-of-contract input (wrong dimension, singular metric, ...).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A mathematical precondition of an operation does not hold on the input.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Metric lost positive-definiteness somewhere on a finite-difference stencil.
class DegenerateChart : public Error {
 public:
  using Error::Error;
};

/// Argument outside the domain of a formula, e.g. 2s + A <= 0.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Numerical procedure failed to converge.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// The ODE solution left the admissible region (alpha <= 0) before any progress.
class EmptyProfile : public SolverError {
 public:
  using SolverError::SolverError;
};

/// Requested feature is not available for this input (e.g. missing complex structure).
class Unsupported : public Error {
 public:
  using Error::Error;
};

}  // namespace soliton_forge
