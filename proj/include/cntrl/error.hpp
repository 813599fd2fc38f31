#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cntrl {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file or stream. line() is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Bad configuration data (template table, lexicons, flags).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Caller violated an operation's precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

// Backend unreachable or failing after all retries. Retryable by the caller.
class TransportError : public Error {
 public:
  using Error::Error;
};

// Backend answered, but the reply does not follow the wire protocol.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

// Request not legal in the current session phase.
class ConflictError : public Error {
 public:
  using Error::Error;
};

// Training produced a NaN or infinite loss.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace cntrl
