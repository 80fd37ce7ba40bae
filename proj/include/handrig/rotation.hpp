#pragma once

// SO(3) / so(3) primitives: hat, vee, exp, log, geodesic distance.
//
// All functions are pure and operate in double precision. Rotations are
// stored as 3x3 matrices acting on column vectors.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/LU>

#include "handrig/error.hpp"

namespace handrig {

using Vector3 = Eigen::Vector3d;
using Matrix3 = Eigen::Matrix3d;

inline constexpr double kPi = std::numbers::pi;

/// Below this angle exp/log switch to Taylor expansions of the Rodrigues
/// coefficients.
inline constexpr double kSmallAngle = 1e-6;

/// log_so3 recovers the axis from the symmetric part once the angle is this
/// close to pi, where the skew part carries no usable direction.
inline constexpr double kNearPi = 1e-2;

/// Tolerance used for orthonormality, skew-symmetry and unit-norm checks.
inline constexpr double kStructuralTol = 1e-9;

/// Skew-symmetric 3x3 matrix. Only constructible from an axial vector or a
/// checked matrix, so M == -M^T holds exactly.
class SkewMatrix {
 public:
  SkewMatrix() : m_(Matrix3::Zero()) {}

  static SkewMatrix from_vector(const Vector3& v) {
    SkewMatrix s;
    s.m_ << 0.0, -v.z(), v.y(),
            v.z(), 0.0, -v.x(),
            -v.y(), v.x(), 0.0;
    return s;
  }

  /// Projects `m` onto the skew-symmetric matrices after checking that it is
  /// already skew within `tol`. Throws NotSkew otherwise.
  static SkewMatrix from_matrix(const Matrix3& m, double tol = kStructuralTol) {
    const double asym = (m + m.transpose()).cwiseAbs().maxCoeff();
    if (!(asym <= tol)) {
      std::ostringstream os;
      os << "matrix is not skew-symmetric (max |M + M^T| = " << asym << ")";
      throw NotSkew(os.str());
    }
    return from_vector(Vector3(0.5 * (m(2, 1) - m(1, 2)),
                               0.5 * (m(0, 2) - m(2, 0)),
                               0.5 * (m(1, 0) - m(0, 1))));
  }

  const Matrix3& matrix() const { return m_; }
  Vector3 operator*(const Vector3& u) const { return m_ * u; }

 private:
  Matrix3 m_;
};

/// Element of SO(3).
class Rotation {
 public:
  Rotation() : m_(Matrix3::Identity()) {}

  static Rotation identity() { return Rotation(); }

  /// Checked construction: R^T R = I and det R = +1 within `tol`.
  static Rotation from_matrix(const Matrix3& m, double tol = kStructuralTol) {
    if (!m.allFinite()) throw NotRotation("rotation matrix has non-finite entries");
    const double ortho = (m.transpose() * m - Matrix3::Identity()).cwiseAbs().maxCoeff();
    const double det = m.determinant();
    if (ortho > tol || std::abs(det - 1.0) > tol) {
      std::ostringstream os;
      os << "matrix is not a rotation (orthogonality error " << ortho
         << ", det " << det << ")";
      throw NotRotation(os.str());
    }
    return Rotation(m);
  }

  /// No validation. For results of exact constructions (Rodrigues, products
  /// of rotations) whose deviation from SO(3) is pure rounding.
  static Rotation unchecked(const Matrix3& m) { return Rotation(m); }

  const Matrix3& matrix() const { return m_; }
  double operator()(int r, int c) const { return m_(r, c); }
  double trace() const { return m_.trace(); }

  Rotation transpose() const { return Rotation(m_.transpose()); }
  Rotation inverse() const { return transpose(); }

  Rotation operator*(const Rotation& other) const { return Rotation(m_ * other.m_); }
  Vector3 operator*(const Vector3& v) const { return m_ * v; }

  bool operator==(const Rotation& other) const { return m_ == other.m_; }

 private:
  explicit Rotation(const Matrix3& m) : m_(m) {}
  Matrix3 m_;
};

inline SkewMatrix hat(const Vector3& v) { return SkewMatrix::from_vector(v); }

inline Vector3 vee(const SkewMatrix& m) {
  const Matrix3& s = m.matrix();
  return Vector3(s(2, 1), s(0, 2), s(1, 0));
}

/// vee() for an arbitrary matrix; throws NotSkew when |M + M^T| exceeds `tol`.
inline Vector3 vee(const Matrix3& m, double tol = kStructuralTol) {
  return vee(SkewMatrix::from_matrix(m, tol));
}

/// Axial vector of the skew part (R - R^T) / 2, i.e. sin(angle) * axis.
inline Vector3 skew_part_axial(const Matrix3& r) {
  return 0.5 * Vector3(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
}

/// Rodrigues formula R = I + A V + B V^2 with V = hat(v).
inline Rotation exp_so3(const Vector3& v) {
  const double theta2 = v.squaredNorm();
  const double theta = std::sqrt(theta2);
  double a;
  double b;
  if (theta < kSmallAngle) {
    a = 1.0 - theta2 / 6.0;
    b = 0.5 - theta2 / 24.0;
  } else {
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / theta2;
  }
  const Matrix3 k = hat(v).matrix();
  return Rotation::unchecked(Matrix3::Identity() + a * k + b * (k * k));
}

/// Rotation vector with angle in [0, pi]. At exactly pi the axis sign is
/// chosen so its largest-magnitude component is positive.
inline Vector3 log_so3(const Rotation& rot) {
  const Matrix3& r = rot.matrix();
  const Vector3 w = skew_part_axial(r);  // sin(theta) * axis
  const double s = w.norm();
  const double c = std::clamp(0.5 * (r.trace() - 1.0), -1.0, 1.0);
  const double theta = std::atan2(s, c);

  if (theta < kSmallAngle) {
    // theta / sin(theta) = 1 + theta^2 / 6 + O(theta^4)
    return (1.0 + theta * theta / 6.0) * w;
  }
  if (kPi - theta > kNearPi) {
    return (theta / s) * w;
  }

  // Near pi: (R + R^T) / 2 = c I + (1 - c) u u^T.
  const Matrix3 uu = (0.5 * (r + r.transpose()) - c * Matrix3::Identity()) / (1.0 - c);
  int k = 0;
  uu.diagonal().maxCoeff(&k);
  Vector3 axis = uu.col(k) / std::sqrt(std::max(uu(k, k), 0.0));
  axis.normalize();
  const double alignment = axis.dot(w);
  if (alignment < 0.0) {
    axis = -axis;
  } else if (alignment == 0.0) {
    int big = 0;
    axis.cwiseAbs().maxCoeff(&big);
    if (axis(big) < 0.0) axis = -axis;
  }
  return theta * axis;
}

/// Angle of R1^T R2, the intrinsic distance on SO(3), in radians.
inline double geodesic_distance(const Rotation& r1, const Rotation& r2) {
  const Matrix3 rel = r1.matrix().transpose() * r2.matrix();
  const double s = skew_part_axial(rel).norm();
  const double c = std::clamp(0.5 * (rel.trace() - 1.0), -1.0, 1.0);
  return std::atan2(s, c);
}

/// Throws NotUnit unless |norm(a) - 1| <= tol.
inline void require_unit(const Vector3& a, const char* what, double tol = kStructuralTol) {
  const double n = a.norm();
  if (!(std::abs(n - 1.0) <= tol)) {
    std::ostringstream os;
    os << what << " must be unit length (norm " << n << ")";
    throw NotUnit(os.str());
  }
}

/// Rotation by `angle` radians about unit axis `a`.
inline Rotation rotation_about(const Vector3& a, double angle) {
  require_unit(a, "rotation axis");
  return exp_so3(angle * a);
}

inline double rad_to_deg(double r) { return r * (180.0 / kPi); }
inline double deg_to_rad(double d) { return d * (kPi / 180.0); }

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
  double w = std::remainder(a, 2.0 * kPi);
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

}  // namespace handrig
