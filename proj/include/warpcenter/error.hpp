#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace warpcenter {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Caller passed an argument violating an operation's precondition.
class ArgumentError : public Error {
public:
  using Error::Error;
};

/// The generative model could not be evaluated (e.g. covariance not factorable).
class ModelError : public Error {
public:
  using Error::Error;
};

/// Laplacian construction failed.
class ConstructionError : public Error {
public:
  enum class Kind { IsolatedNode, DuplicateObservations, Disconnected };

  ConstructionError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

private:
  Kind kind_;
};

/// A Dirichlet solve failed or did not reach the residual target.
class SolverError : public Error {
public:
  SolverError(const std::string& what, double residual = -1.0) : Error(what), residual_(residual) {}

  /// Achieved relative residual, or a negative value when no solution was produced.
  double residual() const noexcept { return residual_; }

private:
  double residual_;
};

/// Segmentation produced nothing usable.
class SegmentationError : public Error {
public:
  using Error::Error;
};

/// Malformed input file.
class FormatError : public Error {
public:
  using Error::Error;
};

}  // namespace warpcenter
