#pragma once

#include <stdexcept>
#include <string>

namespace convodyn {

// Base of every error raised by the library. The CLI maps subclasses to exit
// codes: validation-like errors exit 1, I/O and transport errors exit 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input violates a documented contract (bad values, inconsistent records).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Malformed serialized input; carries the 1-based line number when known.
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : ValidationError("line " + std::to_string(line) + ": " + what), line_(line) {}
  explicit ParseError(const std::string& what) : ValidationError(what) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_ = 0;
};

// Precondition of an operation not met by the caller (empty series, etc.).
class ContractError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Filesystem failures.
class IoError : public Error {
 public:
  using Error::Error;
};

// Scorer endpoint unreachable or answering outside the wire protocol.
class TransportError : public Error {
 public:
  using Error::Error;
};

}  // namespace convodyn
