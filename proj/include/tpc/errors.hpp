#pragma once

#include <stdexcept>
#include <string>

namespace tpc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A point pair or step leaves the region where minimizing geodesics are
/// unique (antipodal factors, distance >= pi/sqrt(A), conjugate profiles).
class DomainViolation : public Error {
 public:
  using Error::Error;
};

class DegenerateSpan : public Error {
 public:
  using Error::Error;
};

/// x == y when a nondegenerate geodesic segment was required.
class DegenerateSegment : public Error {
 public:
  using Error::Error;
};

class BaseMismatch : public Error {
 public:
  using Error::Error;
};

class SolverFailure : public Error {
 public:
  using Error::Error;
};

class ConeViolation : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class GridMismatch : public Error {
 public:
  using Error::Error;
};

/// A numerically audited postcondition failed.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace tpc
