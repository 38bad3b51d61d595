#pragma once

#include <stdexcept>
#include <string>

namespace fci {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidGeometry : public Error {
 public:
  using Error::Error;
};

class InvalidSwitch : public Error {
 public:
  using Error::Error;
};

/// Coupling profile does not fit the geometry or carries non-finite values.
class InvalidProfile : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class NotHermitian : public Error {
 public:
  using Error::Error;
};

/// Matrix is Hermitian but violates HC + CH = 0.
class NotChiral : public Error {
 public:
  using Error::Error;
};

class SolverFailure : public Error {
 public:
  using Error::Error;
};

/// A scalar function produced NaN/inf on the spectrum.
class NonFiniteFunction : public Error {
 public:
  using Error::Error;
};

/// Input lies outside the documented domain of the tanh oracle.
class OracleRangeError : public Error {
 public:
  using Error::Error;
};

class InvalidDelta : public Error {
 public:
  using Error::Error;
};

/// Numerical failure at a scan point, or a violated pipeline invariant.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

/// Experiment configuration error; `path()` names the offending field.
class ConfigError : public Error {
 public:
  ConfigError(std::string path, const std::string& what)
      : Error(path.empty() ? what : path + ": " + what), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace fci
