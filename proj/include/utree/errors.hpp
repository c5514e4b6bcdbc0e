#pragma once

#include <stdexcept>
#include <string>

namespace utree {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A vertex path names a child index that does not exist.
class AddressError : public Error {
 public:
  using Error::Error;
};

/// A request exceeds the configured depth cap or the enumeration budget.
class CapError : public Error {
 public:
  using Error::Error;
};

/// An argument is outside an operation's domain.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Exact and floating values were mixed, or value dimensions differ.
class ModeError : public Error {
 public:
  using Error::Error;
};

/// A tree configuration breaks a weight or branching invariant.
class ValidationError : public Error {
 public:
  ValidationError(const std::string& what, std::string vertex)
      : Error(what), vertex_(std::move(vertex)) {}
  const std::string& vertex() const { return vertex_; }

 private:
  std::string vertex_;
};

/// A schedule cannot be realized (transition budget, horizon, stride).
class ScheduleError : public Error {
 public:
  using Error::Error;
};

/// Malformed input document.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace utree
