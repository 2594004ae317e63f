#pragma once

#include <stdexcept>
#include <string>

namespace esw {

/// Base class for all library errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed input file or JSON text.
struct ParseError : Error {
  using Error::Error;
};

/// Model violates a structural requirement (convexity, ordering, tail, symmetry pattern).
struct ValidationError : Error {
  using Error::Error;
};

/// Evaluation requested outside the lateral box or other admissible range.
struct OutOfDomainError : Error {
  using Error::Error;
};

/// An iterative scheme failed to reach its tolerance.
struct ConvergenceError : Error {
  using Error::Error;
};

/// Operation requires a model symmetry the given model does not declare.
struct SymmetryMismatchError : Error {
  using Error::Error;
};

/// Sextic roots too close to the real axis or to the conjugate triple for a
/// separating contour.
struct DegenerateRootsError : Error {
  using Error::Error;
};

/// Richardson extrapolants toward the limiting velocity failed to stabilise.
struct ExtrapolationUnstableError : Error {
  using Error::Error;
};

/// No secular root below the limiting velocity.
struct NoRootError : Error {
  using Error::Error;
};

/// Adaptive ray integrator hit its minimum step size.
struct StepRejectedError : Error {
  using Error::Error;
};

/// Requested dispersion branch does not exist anywhere on the sampling grid.
struct BranchAbsentError : Error {
  using Error::Error;
};

}  // namespace esw
