#pragma once

#include <stdexcept>
#include <string>

namespace heavyset {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Arithmetic mixing two different quadratic fields.
class UnsupportedField : public Error {
 public:
  using Error::Error;
};

/// Violated precondition on an argument (non-positive radius, empty grid, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Points or sets that belong to different group spaces.
class SpaceMismatch : public Error {
 public:
  using Error::Error;
};

/// A configured resource cap (grid size, horizon, bit length) would be exceeded.
class ResourceCap : public Error {
 public:
  using Error::Error;
};

/// Malformed or incomplete experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// An exact invariant that must hold did not.
class InvariantFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace heavyset
