#pragma once

#include <stdexcept>
#include <string>

namespace pfactor {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: bad dimensions, unparsable files, non-finite data.
class InputError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public InputError {
 public:
  using InputError::InputError;
};

class ParseError : public InputError {
 public:
  using InputError::InputError;
};

class NonFiniteValue : public InputError {
 public:
  using InputError::InputError;
};

class IndexOutOfRange : public InputError {
 public:
  using InputError::InputError;
};

/// The mathematical assumptions of an operation do not hold for the given data.
class PreconditionViolated : public Error {
 public:
  using Error::Error;
};

class DecompositionIncomplete : public PreconditionViolated {
 public:
  using PreconditionViolated::PreconditionViolated;
};

class EmptySample : public PreconditionViolated {
 public:
  using PreconditionViolated::PreconditionViolated;
};

class SingularBasePoint : public PreconditionViolated {
 public:
  using PreconditionViolated::PreconditionViolated;
};

class NonSquareSystem : public PreconditionViolated {
 public:
  using PreconditionViolated::PreconditionViolated;
};

class NotPRegularAlongH : public PreconditionViolated {
 public:
  using PreconditionViolated::PreconditionViolated;
};

class HNotAdmissible : public PreconditionViolated {
 public:
  using PreconditionViolated::PreconditionViolated;
};

class NoMultiplierExists : public PreconditionViolated {
 public:
  using PreconditionViolated::PreconditionViolated;
};

class NoRootInBracket : public PreconditionViolated {
 public:
  using PreconditionViolated::PreconditionViolated;
};

/// An iterative method could not continue.
class SolverBreakdown : public Error {
 public:
  using Error::Error;
};

class FactorMatrixSingular : public SolverBreakdown {
 public:
  using SolverBreakdown::SolverBreakdown;
};

class WeaklyActiveSetEstimateUnstable : public SolverBreakdown {
 public:
  using SolverBreakdown::SolverBreakdown;
};

}  // namespace pfactor
