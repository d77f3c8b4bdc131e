#pragma once

#include <stdexcept>
#include <string>

namespace heatk {

// Caller passed something that violates a documented precondition.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A coefficient, sample or function value came out non-finite.
class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Query point lies outside the computational domain.
class OutOfDomain : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Linear solve or optimizer failed to produce a usable answer.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// L-curve has no convex corner; alpha must be given manually.
class NoCornerError : public SolverError {
 public:
  using SolverError::SolverError;
};

// Malformed text/JSON input; message carries the line number when known.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace heatk
