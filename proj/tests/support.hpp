#pragma once

// Shared fixtures for the test binaries.

#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "handrig/handrig.hpp"
#include "handrig/io/json_io.hpp"
#include "handrig/io/mesh_io.hpp"

namespace handrig::testing {

inline std::string data_path(const std::string& name) { return std::string(HANDRIG_DATA_DIR) + "/" + name; }
inline std::string golden_path(const std::string& name) { return std::string(HANDRIG_GOLDEN_DIR) + "/" + name; }

inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::path(HANDRIG_TEST_TMP) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline HandSkeleton fixture_skeleton() { return io::load_skeleton(data_path("fixture_skeleton.json")); }
inline HandModel fixture_model() { return build_hand_model(fixture_skeleton()); }
inline SkinnedMesh fixture_mesh() {
  return io::load_skinned_mesh(data_path("fixture_hand.obj"), data_path("fixture_hand_weights.txt"));
}

/// Uniformly distributed rotation (Shoemake quaternion method).
template <typename Rng>
Rotation random_rotation(Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double u1 = u(rng), u2 = 2.0 * kPi * u(rng), u3 = 2.0 * kPi * u(rng);
  const Eigen::Quaterniond q(std::sqrt(u1) * std::cos(u3), std::sqrt(1.0 - u1) * std::sin(u2),
                             std::sqrt(1.0 - u1) * std::cos(u2), std::sqrt(u1) * std::sin(u3));
  return Rotation::unchecked(q.normalized().toRotationMatrix());
}

template <typename Rng>
Vector3 random_direction(Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vector3 v(n(rng), n(rng), n(rng));
  return v.normalized();
}

/// Rotation about `axis` built with Eigen's own angle-axis code.
inline Matrix3 eigen_rotation(const Vector3& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

inline double frobenius_objective(const Matrix3& r, const Vector3& a, double t) {
  return (eigen_rotation(a, t) - r).norm();
}

}  // namespace handrig::testing
