#pragma once

#include <stdexcept>
#include <string>

namespace ehrcsd {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text (catalog, delimited tables, graph files).
class ParseError : public Error {
public:
  using Error::Error;
};

/// A structurally valid input that violates a documented invariant.
class ValidationError : public Error {
public:
  using Error::Error;
};

/// Invalid run configuration.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// A stage could not run on the data it was given (empty at-risk set, unknown id, ...).
class DataError : public Error {
public:
  using Error::Error;
};

/// A file could not be read or written.
class IoError : public Error {
public:
  using Error::Error;
};

} // namespace ehrcsd
