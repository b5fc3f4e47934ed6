#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace netinfer {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed text input. `line()` is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Artifacts that parse individually but disagree with each other.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

/// Singular, ill-conditioned or otherwise numerically unusable input.
class NumericError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Precondition violated by the caller (bad hyperparameter, wrong shape, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace netinfer
