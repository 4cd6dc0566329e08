#pragma once

#include <stdexcept>
#include <string>

namespace lanepilot {

// Base class for every error raised by the core library. The C API maps
// each subclass onto a distinct status code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A precondition of an operation was violated by the caller.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

// Input is structurally valid but too small to process (e.g. a 1-row frame).
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

enum class ParseErrorKind {
  kMalformedHeader,
  kTruncatedPayload,
  kUnsupportedMaxval,
};

class ParseError : public Error {
 public:
  ParseError(ParseErrorKind kind, const std::string& what)
      : Error(what), kind_(kind) {}

  ParseErrorKind kind() const noexcept { return kind_; }

 private:
  ParseErrorKind kind_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace lanepilot
