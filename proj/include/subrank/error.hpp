#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace subrank {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inputs that violate a documented precondition: dimension mismatches,
/// non-finite scores, malformed data.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Malformed text input. `line()` is 1-based, 0 when not attributable.
class ParseError : public InvalidInput {
 public:
  ParseError(const std::string& what, std::size_t line)
      : InvalidInput(line == 0 ? what
                               : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// An internal invariant failed (e.g. weights left the simplex).
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace subrank
