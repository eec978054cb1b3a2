#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace oncoprompt {

// Base for every error raised by the library. The CLI maps the concrete
// subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input data or configuration is malformed.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class SchemaError : public ValidationError {
 public:
  explicit SchemaError(const std::string& column)
      : ValidationError("schema error: missing column '" + column + "'"),
        column_(column) {}
  const std::string& column() const noexcept { return column_; }

 private:
  std::string column_;
};

class EmptyInputError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DomainError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class SplitError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class SerializationError : public ValidationError {
 public:
  SerializationError(const std::string& field, const std::string& what)
      : ValidationError(what), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// A line of a line-oriented input could not be parsed. `line` is 1-based.
class ParseError : public ValidationError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : ValidationError("line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class VocabularyError : public ParseError {
 public:
  using ParseError::ParseError;
};

// Caller broke a precondition (e.g. mismatched vector lengths).
class ContractError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class BackendError : public Error {
 public:
  enum class Kind {
    kRetryable,  // timeout, HTTP 429, HTTP 5xx
    kFatal,      // auth failure, bad request, missing key
    kExhausted,  // retryable failures ran out of attempts
  };

  BackendError(Kind kind, const std::string& what, int http_status = 0)
      : Error(what), kind_(kind), http_status_(http_status) {}

  Kind kind() const noexcept { return kind_; }
  int http_status() const noexcept { return http_status_; }
  bool retryable() const noexcept { return kind_ == Kind::kRetryable; }

 private:
  Kind kind_;
  int http_status_;
};

}  // namespace oncoprompt
