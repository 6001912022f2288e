#pragma once

#include <stdexcept>
#include <string>

namespace sintheta {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Incompatible or out-of-range matrix dimensions / split ranks.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A decomposition failed to converge or produced an invalid factorization.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// An input claimed to be orthonormal is not, beyond tolerance.
class OrthonormalityError : public Error {
 public:
  using Error::Error;
};

/// A singular value cross-gap is not safely bounded away from zero.
class GapError : public Error {
 public:
  using Error::Error;
};

/// The estimated series map norm is >= 1; the expansion does not converge.
class NonContractionError : public Error {
 public:
  using Error::Error;
};

/// The series hit its iteration cap before the tail certificate met tolerance.
class TruncationError : public Error {
 public:
  using Error::Error;
};

/// An operation restricted to exactly rank-r inputs got something else.
class RankError : public Error {
 public:
  using Error::Error;
};

/// Invalid experiment/CLI configuration; message names the offending field.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// File could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace sintheta
