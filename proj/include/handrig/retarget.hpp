#pragma once

// Pose projection SO(3)^15 -> R^20, reconstruction, pose sampling and the
// round-trip accuracy/timing benchmark.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "handrig/hand_model.hpp"
#include "handrig/projection.hpp"
#include "handrig/rotation.hpp"

namespace handrig {

enum class MethodChoice { bch, naive, lsq };

inline constexpr std::array<MethodChoice, 3> kAllMethods = {MethodChoice::bch, MethodChoice::naive,
                                                            MethodChoice::lsq};

inline std::string_view to_string(MethodChoice m) {
  switch (m) {
    case MethodChoice::bch: return "bch";
    case MethodChoice::naive: return "naive";
    case MethodChoice::lsq: return "lsq";
  }
  return "?";
}

inline MethodChoice method_from_string(std::string_view s) {
  for (MethodChoice m : kAllMethods) {
    if (to_string(m) == s) return m;
  }
  throw SchemaError("unknown method \"" + std::string(s) + "\" (expected bch, naive or lsq)");
}

struct ProjectedPose {
  JointAngleVector angles;
  int clamp_count = 0;
};

/// Projects every joint rotation onto its joint subgroup. One-DOF joints use
/// the closed form (log projection for `naive`); two-DOF joints use the
/// method's 2-DOF projection. Angles are clamped to limits afterwards unless
/// `clamp` is false.
inline ProjectedPose project_pose(const HandModel& model, const PoseFrame& pose, MethodChoice method,
                                  const ProjectionConfig& cfg = {}, bool clamp = true) {
  ProjectedPose out;
  for (int j = 0; j < kNumJoints; ++j) {
    const Rotation r = exp_so3(pose.joints[static_cast<std::size_t>(j)]);
    const JointSpec& js = model.joint(j);
    const auto slot = static_cast<std::size_t>(model.first_slot(j));
    if (const auto* two = std::get_if<TwoDof>(&js.dof)) {
      TwoDofAngles a;
      switch (method) {
        case MethodChoice::bch: {
          const TwoDofResult b = project_2dof_bch(r, two->abduction_axis, two->flexion_axis, cfg);
          a = {b.phi, b.theta};
          break;
        }
        case MethodChoice::naive:
          a = project_2dof_naive(r, two->abduction_axis, two->flexion_axis);
          break;
        case MethodChoice::lsq:
          a = project_2dof_lsq(r, two->abduction_axis, two->flexion_axis, cfg);
          break;
      }
      out.angles[slot] = a.phi;
      out.angles[slot + 1] = a.theta;
      if (clamp) {
        const double phi = two->abduction_limits.clamp(a.phi);
        const double theta = two->flexion_limits.clamp(a.theta);
        out.clamp_count += (phi != a.phi) + (theta != a.theta);
        out.angles[slot] = phi;
        out.angles[slot + 1] = theta;
      }
    } else {
      const OneDof& one = std::get<OneDof>(js.dof);
      const double t = method == MethodChoice::naive ? project_1dof_naive(r, one.axis) : project_1dof(r, one.axis);
      out.angles[slot] = t;
      if (clamp) {
        const double c = one.limits.clamp(t);
        out.clamp_count += (c != t);
        out.angles[slot] = c;
      }
    }
  }
  return out;
}

/// Per-joint rotations reached by angle vector `q`.
inline std::array<Rotation, kNumJoints> reconstruct_pose(const HandModel& model, const JointAngleVector& q) {
  std::array<Rotation, kNumJoints> out;
  for (int j = 0; j < kNumJoints; ++j) out[static_cast<std::size_t>(j)] = joint_rotation(model, j, q);
  return out;
}

/// Per-joint geodesic round-trip error in degrees.
inline std::array<double, kNumJoints> roundtrip_errors_deg(const HandModel& model, const PoseFrame& pose,
                                                           const JointAngleVector& q) {
  const auto target = pose_to_rotations(pose);
  const auto rec = reconstruct_pose(model, q);
  std::array<double, kNumJoints> err{};
  for (std::size_t j = 0; j < err.size(); ++j) err[j] = rad_to_deg(geodesic_distance(target[j], rec[j]));
  return err;
}

enum class SampleKind { on_manifold, off_manifold, adversarial };

inline std::string_view to_string(SampleKind k) {
  switch (k) {
    case SampleKind::on_manifold: return "on_manifold";
    case SampleKind::off_manifold: return "off_manifold";
    case SampleKind::adversarial: return "adversarial";
  }
  return "?";
}

inline SampleKind sample_kind_from_string(std::string_view s) {
  for (SampleKind k : {SampleKind::on_manifold, SampleKind::off_manifold, SampleKind::adversarial}) {
    if (to_string(k) == s) return k;
  }
  throw SchemaError("unknown sample kind \"" + std::string(s) + "\"");
}

/// Uniform sample of joint angles inside the model limits.
template <typename Rng>
JointAngleVector sample_angles(const HandModel& model, Rng& rng) {
  JointAngleVector q;
  for (int j = 0; j < kNumJoints; ++j) {
    const JointSpec& js = model.joint(j);
    const auto slot = static_cast<std::size_t>(model.first_slot(j));
    auto draw = [&](const JointLimits& l) { return std::uniform_real_distribution<double>(l.lower, l.upper)(rng); };
    if (const auto* two = std::get_if<TwoDof>(&js.dof)) {
      q[slot] = draw(two->abduction_limits);
      q[slot + 1] = draw(two->flexion_limits);
    } else {
      q[slot] = draw(std::get<OneDof>(js.dof).limits);
    }
  }
  return q;
}

template <typename Rng>
Vector3 random_unit(Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  for (;;) {
    const Vector3 v(n(rng), n(rng), n(rng));
    const double len = v.norm();
    if (len > 1e-9) return v / len;
  }
}

/// Generates `n` poses.
///   on_manifold:  angles uniform within limits, reconstructed exactly.
///   off_manifold: on_manifold composed with a per-joint perturbation about a
///                 uniform random axis, angle uniform in [0, max_angle].
///   adversarial:  large coupled rotations on every two-DOF joint
///                 (|phi|, |theta| in [max_angle/2, max_angle] about the
///                 joint axes) and large off-axis rotations on one-DOF joints.
inline std::vector<PoseFrame> sample_poses(const HandModel& model, SampleKind kind, std::size_t n, double max_angle,
                                           std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("sample_poses: n must be positive");
  if (!(max_angle >= 0.0) || max_angle > kPi) throw std::invalid_argument("sample_poses: max_angle must lie in [0, pi]");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<PoseFrame> poses;
  poses.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (kind == SampleKind::adversarial) {
      PoseFrame pose;
      for (int j = 0; j < kNumJoints; ++j) {
        const JointSpec& js = model.joint(j);
        auto big = [&] {
          const double mag = max_angle * (0.5 + 0.5 * unit(rng));
          return unit(rng) < 0.5 ? -mag : mag;
        };
        if (const auto* two = std::get_if<TwoDof>(&js.dof)) {
          const double phi = big();
          const double theta = big();
          pose.joints[static_cast<std::size_t>(j)] =
              log_so3(reconstruct_2dof(two->abduction_axis, two->flexion_axis, phi, theta));
        } else {
          // Rotation axis tilted 30-60 degrees away from the joint axis.
          const Vector3& a = std::get<OneDof>(js.dof).axis;
          Vector3 perp = random_unit(rng);
          perp = (perp - perp.dot(a) * a).normalized();
          const double tilt = deg_to_rad(30.0 + 30.0 * unit(rng));
          const Vector3 axis = std::cos(tilt) * a + std::sin(tilt) * perp;
          pose.joints[static_cast<std::size_t>(j)] = big() * axis;
        }
      }
      poses.push_back(pose);
      continue;
    }
    const JointAngleVector q = sample_angles(model, rng);
    auto rotations = reconstruct_pose(model, q);
    if (kind == SampleKind::off_manifold) {
      for (auto& r : rotations) {
        const Vector3 axis = random_unit(rng);
        const double angle = max_angle * unit(rng);
        r = r * exp_so3(angle * axis);
      }
    }
    poses.push_back(rotations_to_pose(rotations));
  }
  return poses;
}

struct ErrorStats {
  double mean_deg = 0.0;
  double max_deg = 0.0;
  double rmse_deg = 0.0;
  std::size_t samples = 0;
};

struct MethodMetrics {
  MethodChoice method = MethodChoice::bch;
  ErrorStats overall;
  std::array<ErrorStats, kNumJoints> per_joint{};
  double mean_time_ms = 0.0;  ///< median batch time over repetitions / pose count
  std::size_t clamp_count = 0;
  /// errors[p][j]: degrees, pose p, joint j.
  std::vector<std::array<double, kNumJoints>> errors;
};

/// Round-trip error of the one-DOF projection variants at one-DOF joints.
struct OneDofVariantStats {
  ErrorStats closed_form;     ///< exact Frobenius minimizer (used by bch/lsq)
  ErrorStats trace_form;      ///< atan2(<vee(skew R), a>, (tr R - 1) / 2)
  ErrorStats log_projection;  ///< <log R, a> (used by naive)
};

struct MetricsReport {
  std::vector<MethodMetrics> methods;
  OneDofVariantStats one_dof_variants;
  std::size_t pose_count = 0;
  std::uint64_t seed = 0;

  const MethodMetrics& at(MethodChoice m) const {
    for (const auto& mm : methods) {
      if (mm.method == m) return mm;
    }
    throw std::out_of_range("method not present in report");
  }
};

struct EvaluationOptions {
  int threads = 1;
  int timing_repetitions = 5;
  bool clamp = true;
};

namespace detail {

class StatsAccumulator {
 public:
  void add(double e) {
    sum_ += e;
    sum_sq_ += e * e;
    max_ = std::max(max_, e);
    ++n_;
  }
  ErrorStats finish() const {
    ErrorStats s;
    s.samples = n_;
    if (n_ == 0) return s;
    s.mean_deg = sum_ / static_cast<double>(n_);
    s.rmse_deg = std::sqrt(sum_sq_ / static_cast<double>(n_));
    s.max_deg = max_;
    return s;
  }

 private:
  double sum_ = 0.0;
  double sum_sq_ = 0.0;
  double max_ = 0.0;
  std::size_t n_ = 0;
};

template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace detail

/// Projects and reconstructs every pose with every requested method.
/// Error aggregation runs over all (pose, joint) samples in a fixed order, so
/// error fields do not depend on the thread count. Timing is measured
/// single-threaded as the median of `timing_repetitions` full batches.
inline MetricsReport evaluate_roundtrip(const HandModel& model, const std::vector<PoseFrame>& poses,
                                        const std::vector<MethodChoice>& methods, const ProjectionConfig& cfg = {},
                                        std::uint64_t seed = 0, const EvaluationOptions& opts = {}) {
  if (poses.empty()) throw std::invalid_argument("evaluate_roundtrip: pose set is empty");
  cfg.validate();
  MetricsReport report;
  report.pose_count = poses.size();
  report.seed = seed;

  for (MethodChoice m : methods) {
    MethodMetrics mm;
    mm.method = m;
    mm.errors.resize(poses.size());
    std::vector<int> clamps(poses.size(), 0);
    detail::parallel_for(poses.size(), opts.threads, [&](std::size_t p) {
      const ProjectedPose proj = project_pose(model, poses[p], m, cfg, opts.clamp);
      mm.errors[p] = roundtrip_errors_deg(model, poses[p], proj.angles);
      clamps[p] = proj.clamp_count;
    });

    detail::StatsAccumulator overall;
    std::array<detail::StatsAccumulator, kNumJoints> per_joint;
    for (std::size_t p = 0; p < poses.size(); ++p) {
      for (std::size_t j = 0; j < static_cast<std::size_t>(kNumJoints); ++j) {
        overall.add(mm.errors[p][j]);
        per_joint[j].add(mm.errors[p][j]);
      }
      mm.clamp_count += static_cast<std::size_t>(clamps[p]);
    }
    mm.overall = overall.finish();
    for (std::size_t j = 0; j < per_joint.size(); ++j) mm.per_joint[j] = per_joint[j].finish();

    std::vector<double> batch_ms;
    for (int rep = 0; rep < std::max(1, opts.timing_repetitions); ++rep) {
      const auto t0 = std::chrono::steady_clock::now();
      double sink = 0.0;
      for (const PoseFrame& pose : poses) sink += project_pose(model, pose, m, cfg, opts.clamp).angles[0];
      const auto t1 = std::chrono::steady_clock::now();
      volatile double keep = sink;
      (void)keep;
      batch_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    std::nth_element(batch_ms.begin(), batch_ms.begin() + static_cast<long>(batch_ms.size() / 2), batch_ms.end());
    mm.mean_time_ms = batch_ms[batch_ms.size() / 2] / static_cast<double>(poses.size());
    report.methods.push_back(std::move(mm));
  }

  detail::StatsAccumulator closed, trace, logp;
  for (const PoseFrame& pose : poses) {
    for (int j = 0; j < kNumJoints; ++j) {
      const auto* one = std::get_if<OneDof>(&model.joint(j).dof);
      if (one == nullptr) continue;
      const Rotation r = exp_so3(pose.joints[static_cast<std::size_t>(j)]);
      auto err = [&](double t) {
        const double c = opts.clamp ? one->limits.clamp(t) : t;
        return rad_to_deg(geodesic_distance(r, exp_so3(c * one->axis)));
      };
      closed.add(err(project_1dof(r, one->axis)));
      trace.add(err(project_1dof_trace(r, one->axis)));
      logp.add(err(project_1dof_naive(r, one->axis)));
    }
  }
  report.one_dof_variants = {closed.finish(), trace.finish(), logp.finish()};
  return report;
}

}  // namespace handrig
