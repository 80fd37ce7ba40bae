#pragma once

#include <stdexcept>
#include <string>

namespace handrig {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Matrix handed to vee() is not skew-symmetric within tolerance.
class NotSkew : public Error {
 public:
  using Error::Error;
};

/// Axis expected to be unit length is not.
class NotUnit : public Error {
 public:
  using Error::Error;
};

/// Matrix is not orthonormal with determinant +1.
class NotRotation : public Error {
 public:
  using Error::Error;
};

/// Two-DOF axes are (anti)parallel, so the joint degenerates to one DOF.
class ParallelAxes : public Error {
 public:
  using Error::Error;
};

/// Skeleton geometry does not define an axis (coincident or collinear points).
class DegenerateGeometry : public Error {
 public:
  using Error::Error;
};

/// Skinning weight row is negative or does not sum to one.
class InvalidWeights : public Error {
 public:
  using Error::Error;
};

/// Segments and model disagree on link labels.
class ModelMismatch : public Error {
 public:
  using Error::Error;
};

/// Input document violates its schema (missing keys, wrong shapes, bad values).
class SchemaError : public Error {
 public:
  using Error::Error;
};

}  // namespace handrig
