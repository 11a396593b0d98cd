#pragma once

#include <stdexcept>
#include <string>

namespace kinodiff {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes disagree. The message names the op and both shapes.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Malformed input data, files or configuration.
class InputError : public Error {
 public:
  using Error::Error;
};

/// NaN/Inf or another numerical breakdown.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace kinodiff
