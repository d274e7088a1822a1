#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tscore {

// Base of every error raised by the library. The CLI maps these to exit
// code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text. `line` is 1-based; 0 means "not tied to a line".
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// A file could not be read, or its content violates a store invariant.
class LoadError : public Error {
 public:
  using Error::Error;
};

// A caller broke an operation's precondition (dimension or schema mismatch,
// empty input, non-finite value).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

// Inconsistent input to an index build (duplicate sentence ids).
class BuildError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace tscore
