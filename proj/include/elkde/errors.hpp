#pragma once

#include <stdexcept>
#include <string>

namespace elkde {

/// Base class for all toolkit errors that are not plain argument mistakes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An operation needs more samples than the ensemble provides.
class InsufficientSamplesError : public Error {
 public:
  using Error::Error;
};

/// Importance weights collapsed (1 - w'w below tolerance).
class DegenerateWeightsError : public Error {
 public:
  using Error::Error;
};

/// The ensemble carries no usable spread (e.g. all particles identical).
class DegenerateEnsembleError : public Error {
 public:
  using Error::Error;
};

/// A symmetric factorization failed; the matrix is not positive definite.
class FactorizationError : public Error {
 public:
  using Error::Error;
};

/// A trajectory or filter produced non-finite state.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace elkde
