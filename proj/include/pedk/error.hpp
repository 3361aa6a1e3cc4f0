#pragma once

#include <stdexcept>
#include <string>

namespace pedk {

// Base for every error raised by the library. The CLI maps the concrete type
// onto a process exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class MissingFileError : public DataError {
 public:
  using DataError::DataError;
};

class DigestMismatchError : public DataError {
 public:
  using DataError::DataError;
};

class SplitLeakError : public DataError {
 public:
  using DataError::DataError;
};

// Non-finite loss or gradient during training.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace pedk
