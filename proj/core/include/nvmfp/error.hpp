#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nvmfp {

// Exit-code contract used by the CLI: 1 validation, 2 I/O, 3 numeric.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept { return 1; }
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

// Out-of-range address or index.
class RangeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ParseError : public ValidationError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : ValidationError("line " + std::to_string(line) + ": " + what), line_(line) {}
  explicit ParseError(const std::string& what) : ValidationError(what) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_ = 0;
};

class IoError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
};

class NumericError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 3; }
};

}  // namespace nvmfp
