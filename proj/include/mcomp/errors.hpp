// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef MCOMP_ERRORS_HPP_
#define MCOMP_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace mcomp {

// Root of every error raised by the library.  The CLI maps any of these to a
// nonzero exit code with the message.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller violated a precondition (dimension mismatch, point outside domain,
// bad argument).
class UsageError : public Error {
 public:
  using Error::Error;
};

// Degenerate or invalid observation region.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Overflow, underflow or non-finite values in a numerical routine.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Fitting could not proceed (bad initialization, rank deficiency).
class EstimationError : public Error {
 public:
  using Error::Error;
};

// Malformed input files, version mismatches, invariant violations on load.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace mcomp

#endif  // MCOMP_ERRORS_HPP_
