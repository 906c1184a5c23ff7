#pragma once

#include <stdexcept>
#include <string>

namespace strotss {

// Base of every error thrown by the library. Callers that only care about
// "something went wrong" can catch this; the CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor shapes or matrix dimensions do not agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// An argument violates a documented precondition (range, size, sign).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// An object was used in the wrong lifecycle state (e.g. reading a gradient
// before backward ran, or running backward twice).
class StateError : public Error {
 public:
  using Error::Error;
};

// A file does not follow the expected binary layout (magic, version, dtype).
class FormatError : public Error {
 public:
  using Error::Error;
};

// A weight file parsed but does not match the network description.
class SpecError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// User-supplied data is well-formed but semantically inconsistent.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class ParseError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ResourceError : public Error {
 public:
  using Error::Error;
};

}  // namespace strotss
