#pragma once

#include <stdexcept>
#include <string>

namespace gfe {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two points are too far apart for a unique minimizing geodesic.
class AntipodalPair : public Error {
 public:
  using Error::Error;
};

/// The weighted Fréchet mean iteration did not reach its residual tolerance.
class NoConvergence : public Error {
 public:
  using Error::Error;
};

/// Nodal values violate the well-posedness ball of geodesic interpolation.
class BallViolation : public Error {
 public:
  using Error::Error;
};

/// The implicit-differentiation system is (numerically) singular.
class SingularSystem : public Error {
 public:
  using Error::Error;
};

class InvalidDomain : public Error {
 public:
  using Error::Error;
};

class OutsideElement : public Error {
 public:
  using Error::Error;
};

class UnsupportedDegree : public Error {
 public:
  using Error::Error;
};

/// Backtracking reached the minimal step without any energy decrease.
class LineSearchStall : public Error {
 public:
  using Error::Error;
};

/// Malformed run configuration or unknown problem name.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace gfe
