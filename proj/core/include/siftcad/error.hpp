#pragma once

#include <stdexcept>
#include <string>

namespace siftcad {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Contract violation on arguments (bad permutation, ML1 >= ML2, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Two inputs disagree on dims or spacing.
class GeometryMismatch : public Error {
 public:
  using Error::Error;
};

/// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// File content is malformed (bad NRRD header, bad JSON schema, ...).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Input is degenerate for the requested operation (constant histogram,
/// empty mask, too few distinct values, ...).
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

}  // namespace siftcad
