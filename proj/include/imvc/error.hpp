#pragma once

#include <stdexcept>
#include <string>

namespace imvc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not line up.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Invalid hyperparameter or argument value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Non-finite value encountered during optimization.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Dataset, model, or label file could not be read or is malformed.
class LoadError : public Error {
 public:
  using Error::Error;
};

}  // namespace imvc
