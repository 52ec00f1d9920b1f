#pragma once

#include <stdexcept>
#include <string>

namespace hthk {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller supplied data that breaks a documented invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// An internal structural invariant failed (e.g. a singular resolvent).
class StructuralError : public Error {
 public:
  using Error::Error;
};

// An iterative procedure hit its iteration cap.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace hthk
