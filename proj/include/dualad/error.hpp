#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace dualad {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidPath : public Error {
 public:
  using Error::Error;
};

class OutOfRange : public Error {
 public:
  using Error::Error;
};

/// Base for scenario/config input errors. `field()` names the offending key.
class InputError : public Error {
 public:
  InputError(std::string field, const std::string& what)
      : Error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class ParseError : public InputError {
 public:
  using InputError::InputError;
};

class SchemaError : public InputError {
 public:
  using InputError::InputError;
};

class ValidationError : public InputError {
 public:
  using InputError::InputError;
};

class ConfigError : public InputError {
 public:
  using InputError::InputError;
};

/// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

class NonPositiveGap : public Error {
 public:
  using Error::Error;
};

class NoFeasibleTrajectory : public Error {
 public:
  using Error::Error;
};

class InsufficientResults : public Error {
 public:
  using Error::Error;
};

class IncompleteTrace : public Error {
 public:
  using Error::Error;
};

class EmptyBenchmark : public Error {
 public:
  using Error::Error;
};

}  // namespace dualad
