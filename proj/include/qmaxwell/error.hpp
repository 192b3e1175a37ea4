#pragma once

#include <stdexcept>
#include <string>

namespace qmaxwell {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument (sizes, ranges, tolerances) is violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Operands built on different discretizations were combined.
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// A matrix is not symmetric, not positive semidefinite, or otherwise not
/// an admissible density operator.
class InvalidOperator : public Error {
 public:
  using Error::Error;
};

/// The density does not stay strictly positive.
class NonPositiveDensity : public Error {
 public:
  using Error::Error;
};

/// Logarithm of a density operator requested where it has no support.
class SingularDensity : public Error {
 public:
  using Error::Error;
};

/// The constraint cannot be met at the requested mode cutoff.
class BasisTooSmall : public Error {
 public:
  BasisTooSmall(const std::string& what, int suggested_modes)
      : Error(what), suggested_modes_(suggested_modes) {}

  int suggested_modes() const noexcept { return suggested_modes_; }

 private:
  int suggested_modes_;
};

// File format errors.

class MalformedRow : public Error {
 public:
  MalformedRow(const std::string& what, int line) : Error(what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

class NonUniformGrid : public Error {
 public:
  using Error::Error;
};

class FileError : public Error {
 public:
  using Error::Error;
};

class DuplicatedEndpoint : public Error {
 public:
  using Error::Error;
};

}  // namespace qmaxwell
