#pragma once

#include <stdexcept>
#include <string>

namespace ibcn {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Block index out of range, length mismatch, or malformed partition.
class InvalidBlockError : public Error {
public:
  using Error::Error;
};

// Malformed input text; carries the 1-based line number when known.
class ParseError : public Error {
public:
  ParseError(const std::string& what, long long line)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  long long line() const { return line_; }

private:
  long long line_ = 0;
};

// Dataset-level problems: empty data, bad labels, unusable columns.
class DataError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

// Raised when a run must stop (non-finite oracle values and the like).
class SolverAbort : public Error {
public:
  using Error::Error;
};

}  // namespace ibcn
