#pragma once

#include <stdexcept>
#include <string>

namespace telc {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class EmptySegmentList : public Error {
 public:
  EmptySegmentList() : Error("segment list is empty") {}
};

class NonPositiveStep : public Error {
 public:
  NonPositiveStep() : Error("time step must be positive") {}
};

class ZeroReferenceVelocity : public Error {
 public:
  ZeroReferenceVelocity() : Error("reference linear velocity must be nonzero") {}
};

class DegenerateVelocity : public Error {
 public:
  explicit DegenerateVelocity(const std::string& what) : Error(what) {}
};

class OutOfRange : public Error {
 public:
  explicit OutOfRange(const std::string& what) : Error(what) {}
};

class DimensionMismatch : public Error {
 public:
  explicit DimensionMismatch(const std::string& what) : Error(what) {}
};

class Infeasible : public Error {
 public:
  explicit Infeasible(const std::string& what) : Error(what) {}
};

class NonPositiveWheelBase : public Error {
 public:
  NonPositiveWheelBase() : Error("wheel base must be positive") {}
};

class NonPsdCovariance : public Error {
 public:
  explicit NonPsdCovariance(const std::string& what) : Error(what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what) {}
};

}  // namespace telc
