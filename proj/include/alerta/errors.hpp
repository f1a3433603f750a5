#pragma once

#include <stdexcept>
#include <string>

namespace alerta {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An API was called out of order (e.g. backprop before forward).
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Required CSV columns are absent.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// Malformed cell or file content.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Data violates a structural invariant (duplicate dates, bad prices).
class IntegrityError : public Error {
 public:
  using Error::Error;
};

/// Raw values cannot be normalized (negative entries).
class PreprocessError : public Error {
 public:
  using Error::Error;
};

/// Invalid user configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Training diverged or could not proceed.
class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace alerta
