#pragma once

#include <stdexcept>
#include <string>

namespace prandtl {

// Base of every error raised by the library. Each subclass names the
// failure category so callers (and the CLI exit-code mapping) can react.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

// Interpolation or evaluation outside the sampled domain.
class RangeError : public Error {
 public:
  using Error::Error;
};

// The field is not negligible at the right edge of a truncated domain.
class DomainTruncationError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class InstabilityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class FitError : public Error {
 public:
  using Error::Error;
};

class FrameError : public Error {
 public:
  using Error::Error;
};

class DecompositionError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class GlueSpecError : public Error {
 public:
  using Error::Error;
};

class FileError : public Error {
 public:
  using Error::Error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace prandtl
