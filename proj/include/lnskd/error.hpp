#pragma once

#include <stdexcept>
#include <string>

namespace lnskd {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor or layer shapes disagree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// An invalid model / training / run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed input data (CSV lines, labels, archives).
class DataError : public Error {
 public:
  using Error::Error;
};

/// A value became NaN or Inf where finiteness is required.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace lnskd
