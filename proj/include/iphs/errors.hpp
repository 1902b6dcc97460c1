#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace iphs {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller broke a precondition: dimension mismatch, non-positive step, bad parameter.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// A named parameter failed validation.
class InvalidParameter : public UsageError {
 public:
  InvalidParameter(std::string field, const std::string& what)
      : UsageError(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// A non-finite value showed up where a finite one is required.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// A model ingredient broke its own contract, e.g. a positivity function returned a value <= 0.
class ModelError : public Error {
 public:
  using Error::Error;
};

/// Evaluation requested outside the model's admissible domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The operation is not defined for this kind of system.
class UnsupportedOperation : public Error {
 public:
  using Error::Error;
};

/// A Runge-Kutta stage could not be evaluated. `stage` is 1-based;
/// `domain_exit` is set when the cause was a DomainError.
class IntegrationError : public Error {
 public:
  IntegrationError(std::size_t stage, const std::string& what, bool domain_exit = false)
      : Error("stage " + std::to_string(stage) + ": " + what), stage_(stage), domain_exit_(domain_exit) {}

  std::size_t stage() const noexcept { return stage_; }
  bool domain_exit() const noexcept { return domain_exit_; }

 private:
  std::size_t stage_;
  bool domain_exit_;
};

}  // namespace iphs
