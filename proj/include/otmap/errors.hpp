#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace otmap {

// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class NonFiniteInput : public Error {
 public:
  using Error::Error;
};

// Requested basis would exceed the configured number of terms.
class CapacityExceeded : public Error {
 public:
  CapacityExceeded(const std::string& what, std::size_t requested, std::size_t cap)
      : Error(what), requested_(requested), cap_(cap) {}
  std::size_t requested() const { return requested_; }
  std::size_t cap() const { return cap_; }

 private:
  std::size_t requested_;
  std::size_t cap_;
};

// The map is not a monotone diffeomorphism at `point`.  `coordinate` is the
// offending output index for triangular maps, or -1 when the sign of the full
// Jacobian determinant is the problem.
class NonMonotoneAtPoint : public Error {
 public:
  NonMonotoneAtPoint(const std::string& what, Eigen::VectorXd point, int coordinate, int stage = -1)
      : Error(what), point_(std::move(point)), coordinate_(coordinate), stage_(stage) {}
  const Eigen::VectorXd& point() const { return point_; }
  int coordinate() const { return coordinate_; }
  int stage() const { return stage_; }

 private:
  Eigen::VectorXd point_;
  int coordinate_;
  int stage_;
};

class BracketNotFound : public Error {
 public:
  using Error::Error;
};

class NoConvergence : public Error {
 public:
  using Error::Error;
};

class UnsupportedOperation : public Error {
 public:
  using Error::Error;
};

class DegenerateBasis : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class InfeasibleProjection : public Error {
 public:
  using Error::Error;
};

// Document-level errors carry the JSON path of the offending node.
class SchemaError : public Error {
 public:
  SchemaError(const std::string& path, const std::string& message)
      : Error(path + ": " + message), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

class UnsupportedVersion : public Error {
 public:
  explicit UnsupportedVersion(int found)
      : Error("unsupported map document version " + std::to_string(found)), found_(found) {}
  int found() const { return found_; }

 private:
  int found_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Tabular input problems.
class MissingValueError : public Error {
 public:
  using Error::Error;
};

class NonNumericCellError : public Error {
 public:
  using Error::Error;
};

class MissingColumnError : public Error {
 public:
  using Error::Error;
};

class StandardizationError : public Error {
 public:
  using Error::Error;
};

}  // namespace otmap
