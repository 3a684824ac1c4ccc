#pragma once

#include <stdexcept>
#include <string>

namespace roundtable {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or invariant-violating input file. Carries the file and
/// 1-based line (0 when the problem is not tied to a line).
class SchemaError : public Error {
 public:
  SchemaError(std::string file, int line, const std::string& message);

  const std::string& file() const noexcept { return file_; }
  int line() const noexcept { return line_; }

 private:
  std::string file_;
  int line_;
};

/// A domain invariant does not hold (participant count, seat separation...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Input is numerically degenerate for the requested operation
/// (collinear landmarks, zero-variance samples).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

}  // namespace roundtable
