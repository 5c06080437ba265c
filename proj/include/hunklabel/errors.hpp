#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hunklabel {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unified diff could not be parsed. line() is 1-based; 0 when the input is
// empty or the problem is not tied to one line.
class MalformedDiff : public Error {
 public:
  MalformedDiff(std::size_t line, const std::string& what)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class OrdinalOverflow : public Error {
 public:
  using Error::Error;
};

class UnknownHunk : public Error {
 public:
  using Error::Error;
};

class EmptyInput : public Error {
 public:
  using Error::Error;
};

class TemplateError : public Error {
 public:
  using Error::Error;
};

// Backend failures. TransportError and TimeoutError are retryable.
class BackendError : public Error {
 public:
  using Error::Error;
};

class TransportError : public BackendError {
 public:
  using BackendError::BackendError;
};

class TimeoutError : public BackendError {
 public:
  using BackendError::BackendError;
};

class AuthError : public BackendError {
 public:
  using BackendError::BackendError;
};

class NoPayload : public Error {
 public:
  using Error::Error;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

class EmptyBenchmark : public Error {
 public:
  using Error::Error;
};

class DomainMismatch : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace hunklabel
