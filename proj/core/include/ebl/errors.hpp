#pragma once

#include <stdexcept>
#include <string>

namespace ebl {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid numerical configuration (quadrature order, step sizes, ...).
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

/// u = Phi^{-1}(Q_t f) requested for f that is a.e. 0 or a.e. 1.
class TrivialFunctionError : public Error {
 public:
  using Error::Error;
};

/// Geometry, dimension, or representation the library does not handle.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// Coefficients do not fall in the regime an operation requires.
class RegimeError : public Error {
 public:
  using Error::Error;
};

/// Q_t f = Phi(<a,.>+b) with |a| > t^{-1/2}; no such f exists.
class InconsistentLipschitzError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

}  // namespace ebl
