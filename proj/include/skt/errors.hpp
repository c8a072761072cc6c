#pragma once

#include <stdexcept>
#include <string>

namespace skt {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input data, config values out of range, records that fail
// validation. CLI maps this to exit code 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// JSON that does not parse. Carries the 1-based line/column of the first
// offending byte so CLI diagnostics can point at it.
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& what, int line, int column)
      : ValidationError(what), line_(line), column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_ = 0;
  int column_ = 0;
};

// A norm lookup that has no defined cell (age outside every declared band,
// or a table missing a subtest/IQ entry). CLI maps this to exit code 2.
class NormCellError : public Error {
 public:
  using Error::Error;
};

// An external helper process (ASR, aligner, negation filter) failed:
// non-zero exit, unparseable reply, or a reply violating the contract.
// CLI maps this to exit code 3.
class ClientError : public Error {
 public:
  using Error::Error;
};

}  // namespace skt
