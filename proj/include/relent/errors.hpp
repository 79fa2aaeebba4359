#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace relent {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vectors or matrices whose dimensions do not agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A value violates a domain invariant (negative weight, nonpositive rate, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Non-finite matrix entries handed to a linear-algebra routine.
class InvalidMatrixError : public Error {
 public:
  using Error::Error;
};

/// Syntax error in one of the text formats. Line and column are 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& what)
      : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace relent
