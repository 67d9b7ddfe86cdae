#pragma once

#include <stdexcept>
#include <string>

namespace relaybf {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed or out-of-domain input (non-finite entries, negative variances, bad shapes).
class InputError : public Error {
public:
  using Error::Error;
};

/// A matrix that must be positive definite is not.
class SingularityError : public Error {
public:
  SingularityError(const std::string &what, double eigenvalue)
      : Error(what), eigenvalue_(eigenvalue) {}
  double eigenvalue() const noexcept { return eigenvalue_; }

private:
  double eigenvalue_;
};

/// An iterative method ran out of iterations or stalled.
class ConvergenceError : public Error {
public:
  using Error::Error;
};

/// Instance is structurally unsuitable for the requested solver (e.g. not diagonal).
class DispatchError : public Error {
public:
  using Error::Error;
};

/// Repeated eigenvalue where a simple one is required.
class DegeneracyError : public Error {
public:
  DegeneracyError(const std::string &what, double gap) : Error(what), gap_(gap) {}
  double gap() const noexcept { return gap_; }

private:
  double gap_;
};

/// Problem is infeasible or unbounded.
class ModelError : public Error {
public:
  using Error::Error;
};

/// Requested operation is outside the supported dimension range.
class ScopeError : public Error {
public:
  using Error::Error;
};

} // namespace relaybf
