#pragma once

#include <stdexcept>
#include <string>

namespace codecal {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input data violates a contract (malformed record, missing field, single-class corpus).
class DataError : public Error {
 public:
  using Error::Error;
};

/// A file could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Invalid user configuration (bad flag value, inconsistent options).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace codecal
