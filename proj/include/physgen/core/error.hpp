#pragma once

#include <stdexcept>
#include <string>

namespace physgen {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument outside the mathematical domain of a formula.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Input that violates a documented precondition or invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace physgen
