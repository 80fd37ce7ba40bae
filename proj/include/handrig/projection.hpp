#pragma once

// Projection of a target rotation onto one- and two-DOF joint subgroups.
//
// One DOF: closed form. Two DOF: the BCH-corrected fixed-point iteration,
// plus a naive log-space projection and a grid/coordinate-descent least
// squares baseline that doubles as the accuracy oracle.

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>
#include <vector>

#include "handrig/error.hpp"
#include "handrig/rotation.hpp"

namespace handrig {

struct ProjectionConfig {
  int bch_iterations = 3;
  double relaxation = 0.5;
  double lsq_grid_step = 1e-3;
  double lsq_refine_tol = 1e-6;

  void validate() const {
    if (bch_iterations < 0) throw SchemaError("bch_iterations must be >= 0");
    if (!(relaxation > 0.0 && relaxation <= 1.0)) throw SchemaError("relaxation must lie in (0, 1]");
    if (!(lsq_grid_step > 0.0)) throw SchemaError("lsq_grid_step must be positive");
    if (!(lsq_refine_tol > 0.0)) throw SchemaError("lsq_refine_tol must be positive");
  }
};

struct TwoDofAngles {
  double phi = 0.0;    ///< abduction, about a1
  double theta = 0.0;  ///< flexion, about a2
};

struct TwoDofResult {
  double phi = 0.0;
  double theta = 0.0;
  int iterations_used = 0;
  double final_residual_norm = 0.0;
};

/// Both atan2 arguments below this magnitude mean the objective is flat in
/// the joint angle; the projection returns 0 there.
inline constexpr double kFlatObjective = 1e-12;

/// Largest |<a1, a2>| accepted for a two-DOF joint.
inline constexpr double kParallelTol = 1e-6;

namespace detail {

// tr(R_a(t)^T R) = cos t (tr R - a^T R a) + 2 sin t <vee(skew R), a> + a^T R a
struct AxisSinusoid {
  double sin_coeff;  // <vee(skew R), a>
  double cos_coeff;  // (tr R - a^T R a) / 2
  double offset;     // a^T R a
};

inline AxisSinusoid axis_sinusoid(const Matrix3& r, const Vector3& a) {
  const double ara = a.dot(r * a);
  return {skew_part_axial(r).dot(a), 0.5 * (r.trace() - ara), ara};
}

inline double flat_safe_atan2(double y, double x) {
  if (std::abs(y) < kFlatObjective && std::abs(x) < kFlatObjective) return 0.0;
  return std::atan2(y, x);
}

inline void require_two_axes(const Vector3& a1, const Vector3& a2) {
  require_unit(a1, "abduction axis");
  require_unit(a2, "flexion axis");
  const double c = a1.dot(a2);
  if (!(std::abs(c) < 1.0 - kParallelTol)) {
    std::ostringstream os;
    os << "two-DOF axes are parallel (|<a1,a2>| = " << std::abs(c) << ")";
    throw ParallelAxes(os.str());
  }
}

inline Vector3 bch_first_order(const Vector3& a1, const Vector3& a2, const Vector3& a1xa2,
                               double phi, double theta) {
  return phi * a1 + theta * a2 + 0.5 * phi * theta * a1xa2;
}

/// Runs the BCH loop and reports the residual norm of every iterate
/// (index 0 is the initialization) through `on_residual`.
template <typename OnResidual>
TwoDofResult bch_iterate(const Rotation& r, const Vector3& a1, const Vector3& a2,
                         const ProjectionConfig& cfg, OnResidual&& on_residual) {
  const Vector3 omega = log_so3(r);
  const Vector3 a1xa2 = a1.cross(a2);
  double phi = omega.dot(a1);
  double theta = omega.dot(a2);
  for (int i = 0; i < cfg.bch_iterations; ++i) {
    const Vector3 residual = omega - bch_first_order(a1, a2, a1xa2, phi, theta);
    on_residual(residual.norm());
    phi += cfg.relaxation * residual.dot(a1);
    theta += cfg.relaxation * residual.dot(a2);
  }
  const double final_norm = (omega - bch_first_order(a1, a2, a1xa2, phi, theta)).norm();
  on_residual(final_norm);
  return {phi, theta, cfg.bch_iterations, final_norm};
}

// max over t of tr(R_a(t)^T R)
inline double best_alignment(const Matrix3& r, const Vector3& a) {
  const AxisSinusoid s = axis_sinusoid(r, a);
  return std::hypot(2.0 * s.cos_coeff, 2.0 * s.sin_coeff) + s.offset;
}

}  // namespace detail

/// Angle t in (-pi, pi] minimizing ||R - R_a(t)||_F, which is also the
/// geodesic minimizer. Returns 0 where the objective is flat.
inline double project_1dof(const Rotation& r, const Vector3& a) {
  require_unit(a, "joint axis");
  const detail::AxisSinusoid s = detail::axis_sinusoid(r.matrix(), a);
  return detail::flat_safe_atan2(s.sin_coeff, s.cos_coeff);
}

/// Trace-form closed form atan2(<vee((R - R^T)/2), a>, (tr R - 1)/2).
/// Coincides with project_1dof when R is a rotation about `a`; kept as a
/// benchmark variant.
inline double project_1dof_trace(const Rotation& r, const Vector3& a) {
  require_unit(a, "joint axis");
  const double y = skew_part_axial(r.matrix()).dot(a);
  const double x = 0.5 * (r.trace() - 1.0);
  return detail::flat_safe_atan2(y, x);
}

/// Log-space projection <log R, a>.
inline double project_1dof_naive(const Rotation& r, const Vector3& a) {
  require_unit(a, "joint axis");
  return log_so3(r).dot(a);
}

/// exp(phi a1^) exp(theta a2^): abduction applied first, then flexion.
inline Rotation reconstruct_2dof(const Vector3& a1, const Vector3& a2, double phi, double theta) {
  return exp_so3(phi * a1) * exp_so3(theta * a2);
}

/// BCH-corrected two-DOF projection: fixed iteration count with relaxation.
inline TwoDofResult project_2dof_bch(const Rotation& r, const Vector3& a1, const Vector3& a2,
                                     const ProjectionConfig& cfg = {}) {
  detail::require_two_axes(a1, a2);
  return detail::bch_iterate(r, a1, a2, cfg, [](double) {});
}

/// Residual norms of each BCH iterate, initialization first; size is
/// cfg.bch_iterations + 1.
inline std::vector<double> bch_residual_history(const Rotation& r, const Vector3& a1,
                                                const Vector3& a2, const ProjectionConfig& cfg = {}) {
  detail::require_two_axes(a1, a2);
  std::vector<double> history;
  history.reserve(static_cast<std::size_t>(cfg.bch_iterations) + 1);
  detail::bch_iterate(r, a1, a2, cfg, [&](double n) { history.push_back(n); });
  return history;
}

/// (<log R, a1>, <log R, a2>); the BCH initialization.
inline TwoDofAngles project_2dof_naive(const Rotation& r, const Vector3& a1, const Vector3& a2) {
  detail::require_two_axes(a1, a2);
  const Vector3 omega = log_so3(r);
  return {omega.dot(a1), omega.dot(a2)};
}

/// Least squares baseline on the geodesic objective.
///
/// phi is scanned on a uniform grid over (-pi, pi] with spacing at most
/// cfg.lsq_grid_step; for every grid phi the best theta is found exactly
/// (the objective is a sinusoid in theta). The best grid cell is then
/// refined by exact coordinate descent until both angles move less than
/// cfg.lsq_refine_tol.
inline TwoDofAngles project_2dof_lsq(const Rotation& r, const Vector3& a1, const Vector3& a2,
                                     const ProjectionConfig& cfg = {}) {
  detail::require_two_axes(a1, a2);
  const Matrix3& target = r.matrix();

  const auto cells = static_cast<long>(std::ceil(2.0 * kPi / cfg.lsq_grid_step));
  const double step = 2.0 * kPi / static_cast<double>(cells);
  double best_phi = 0.0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (long k = 0; k < cells; ++k) {
    const double phi = -kPi + static_cast<double>(k + 1) * step;
    // tr(E2^T E1^T R) is maximized over theta in closed form.
    const Matrix3 m = exp_so3(phi * a1).matrix().transpose() * target;
    const double value = detail::best_alignment(m, a2);
    if (value > best_value) {
      best_value = value;
      best_phi = phi;
    }
  }

  auto best_theta_given = [&](double phi) {
    const Matrix3 m = exp_so3(phi * a1).matrix().transpose() * target;
    const detail::AxisSinusoid s = detail::axis_sinusoid(m, a2);
    return detail::flat_safe_atan2(s.sin_coeff, s.cos_coeff);
  };
  auto best_phi_given = [&](double theta) {
    const Matrix3 m = target * exp_so3(theta * a2).matrix().transpose();
    const detail::AxisSinusoid s = detail::axis_sinusoid(m, a1);
    return detail::flat_safe_atan2(s.sin_coeff, s.cos_coeff);
  };

  double phi = best_phi;
  double theta = best_theta_given(phi);
  constexpr int kMaxSweeps = 500;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    const double next_phi = best_phi_given(theta);
    const double next_theta = best_theta_given(next_phi);
    const double moved = std::max(std::abs(wrap_angle(next_phi - phi)),
                                  std::abs(wrap_angle(next_theta - theta)));
    phi = next_phi;
    theta = next_theta;
    if (moved < cfg.lsq_refine_tol) break;
  }
  return {wrap_angle(phi), wrap_angle(theta)};
}

}  // namespace handrig
