#pragma once

#include <stdexcept>
#include <string>

namespace spdc {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file (syntax level).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Structurally valid input that violates a documented invariant.
/// Messages name the offending field or component.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Evaluation requested outside a model's validity window.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure (non-convergent quadrature, non-physical tensor, ...).
class NumericsError : public Error {
 public:
  using Error::Error;
};

/// Caller violated a documented precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

}  // namespace spdc
