#pragma once

// URDF serialization of a HandModel.
//
// Two-DOF joints become two stacked revolute joints (abduction, then
// flexion) joined by a massless intermediate link, so the URDF chain
// composes exactly like reconstruct_2dof.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <sstream>
#include <string>

#include "handrig/error.hpp"
#include "handrig/hand_model.hpp"
#include "handrig/segmentation.hpp"

namespace handrig {

struct UrdfConfig {
  std::string robot_name = "hand";
  double density = 1000.0;        ///< kg/m^3 for bounding-box masses
  double min_extent = 1e-3;       ///< floor on each bounding-box side, m
  double box_thickness = 0.018;   ///< cross-section of primitive box visuals, m
  double effort = 1.0;            ///< N m, placeholder
  double velocity = 5.0;          ///< rad/s, placeholder
  double damping = 0.01;          ///< N m s/rad, placeholder
  std::string mesh_dir = "meshes";
};

struct UrdfDocument {
  std::string xml;
  int revolute_joints = 0;
  int links = 0;
};

namespace urdf_detail {

/// Nine significant digits; negative zero prints as 0.
inline std::string num(double v, int digits = 9) {
  if (v == 0.0) v = 0.0;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

inline std::string vec(const Vector3& v, int digits = 9) {
  return num(v.x(), digits) + " " + num(v.y(), digits) + " " + num(v.z(), digits);
}

/// Roll-pitch-yaw (fixed X, Y, Z) of R = Rz(yaw) Ry(pitch) Rx(roll).
inline Vector3 rpy(const Matrix3& r) {
  const double pitch = std::asin(std::clamp(-r(2, 0), -1.0, 1.0));
  if (std::abs(std::cos(pitch)) > 1e-9) {
    return {std::atan2(r(2, 1), r(2, 2)), pitch, std::atan2(r(1, 0), r(0, 0))};
  }
  return {0.0, pitch, std::atan2(-r(0, 1), r(1, 1))};
}

/// Rotation taking +x onto `d`.
inline Matrix3 align_x_to(const Vector3& d) {
  const Vector3 x = d.normalized();
  const Vector3 helper = std::abs(x.z()) < 0.9 ? Vector3::UnitZ() : Vector3::UnitY();
  const Vector3 y = helper.cross(x).normalized();
  Matrix3 r;
  r.col(0) = x;
  r.col(1) = y;
  r.col(2) = x.cross(y);
  return r;
}

struct Box {
  Vector3 center = Vector3::Zero();    ///< link frame
  Matrix3 orientation = Matrix3::Identity();
  Vector3 size = Vector3::Zero();
};

inline Box bounding_box(const std::vector<Vector3>& pts, double min_extent) {
  Vector3 lo = Vector3::Constant(std::numeric_limits<double>::infinity());
  Vector3 hi = -lo;
  for (const auto& p : pts) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  Box b;
  b.center = 0.5 * (lo + hi);
  b.size = (hi - lo).cwiseMax(Vector3::Constant(min_extent));
  return b;
}

/// Primitive box for a link without mesh: from the link origin to its distal
/// keypoint (palm: box around wrist, thumb CMC and finger MCPs).
inline Box primitive_box(const HandModel& model, int link, const UrdfConfig& cfg) {
  if (link == 0) {
    std::vector<Vector3> pts = {Vector3::Zero()};
    for (const auto& js : model.joints()) {
      if (js.parent == model.root_link()) pts.push_back(js.origin - model.root_origin());
    }
    Box b = bounding_box(pts, cfg.box_thickness);
    return b;
  }
  const JointSpec& js = model.joint(link - 1);
  const Vector3 d = js.distal - js.origin;
  Box b;
  b.center = 0.5 * d;
  b.orientation = align_x_to(d);
  b.size = Vector3(std::max(d.norm(), cfg.min_extent), cfg.box_thickness, cfg.box_thickness);
  return b;
}

inline void write_inertial(std::ostringstream& os, const Box& b, const UrdfConfig& cfg) {
  const Vector3& s = b.size;
  const double mass = cfg.density * s.x() * s.y() * s.z();
  const double ixx = mass / 12.0 * (s.y() * s.y() + s.z() * s.z());
  const double iyy = mass / 12.0 * (s.x() * s.x() + s.z() * s.z());
  const double izz = mass / 12.0 * (s.x() * s.x() + s.y() * s.y());
  os << "    <inertial>\n"
     << "      <origin xyz=\"" << vec(b.center) << "\" rpy=\"" << vec(rpy(b.orientation)) << "\"/>\n"
     << "      <mass value=\"" << num(mass) << "\"/>\n"
     << "      <inertia ixx=\"" << num(ixx) << "\" ixy=\"0\" ixz=\"0\" iyy=\"" << num(iyy)
     << "\" iyz=\"0\" izz=\"" << num(izz) << "\"/>\n"
     << "    </inertial>\n";
}

inline void write_geometry(std::ostringstream& os, const char* tag, const std::string& link,
                           const std::optional<Box>& box, const UrdfConfig& cfg) {
  os << "    <" << tag << ">\n";
  if (box) {
    os << "      <origin xyz=\"" << vec(box->center) << "\" rpy=\"" << vec(rpy(box->orientation)) << "\"/>\n"
       << "      <geometry>\n        <box size=\"" << vec(box->size) << "\"/>\n      </geometry>\n";
  } else {
    os << "      <origin xyz=\"0 0 0\" rpy=\"0 0 0\"/>\n"
       << "      <geometry>\n        <mesh filename=\"" << cfg.mesh_dir << "/" << link << ".obj\"/>\n"
       << "      </geometry>\n";
  }
  os << "    </" << tag << ">\n";
}

inline void write_revolute(std::ostringstream& os, const std::string& name, const std::string& parent,
                           const std::string& child, const Vector3& xyz, const Vector3& axis,
                           const JointLimits& limits, const UrdfConfig& cfg) {
  os << "  <joint name=\"" << name << "\" type=\"revolute\">\n"
     << "    <parent link=\"" << parent << "\"/>\n"
     << "    <child link=\"" << child << "\"/>\n"
     << "    <origin xyz=\"" << vec(xyz) << "\" rpy=\"0 0 0\"/>\n"
     // Axes keep full precision so they survive a text round trip exactly.
     << "    <axis xyz=\"" << vec(axis, 17) << "\"/>\n"
     << "    <limit lower=\"" << num(limits.lower) << "\" upper=\"" << num(limits.upper) << "\" effort=\""
     << num(cfg.effort) << "\" velocity=\"" << num(cfg.velocity) << "\"/>\n"
     << "    <dynamics damping=\"" << num(cfg.damping) << "\"/>\n"
     << "  </joint>\n";
}

}  // namespace urdf_detail

/// Serializes `model` as URDF. With `segments`, every link references
/// `<mesh_dir>/<link>.obj` and gets bounding-box inertials from its segment;
/// without, links get primitive boxes.
inline UrdfDocument export_urdf(const HandModel& model, const Segmentation* segments, const UrdfConfig& cfg = {}) {
  using namespace urdf_detail;
  if (segments != nullptr) {
    for (int l = 0; l < model.link_count(); ++l) {
      const auto& expected = model.link_names()[static_cast<std::size_t>(l)];
      const auto& got = segments->segments[static_cast<std::size_t>(l)].link;
      if (expected != got) throw ModelMismatch("segment " + std::to_string(l) + " is \"" + got + "\", model link is \"" + expected + "\"");
    }
  }

  UrdfDocument doc;
  std::ostringstream os;
  os << "<?xml version=\"1.0\"?>\n"
     << "<robot name=\"" << cfg.robot_name << "\">\n";

  for (int l = 0; l < model.link_count(); ++l) {
    const std::string& name = model.link_names()[static_cast<std::size_t>(l)];
    std::optional<Box> primitive;
    Box inertial_box;
    if (segments != nullptr && !segments->segments[static_cast<std::size_t>(l)].vertices.empty()) {
      inertial_box = bounding_box(segments->segments[static_cast<std::size_t>(l)].vertices, cfg.min_extent);
    } else {
      primitive = primitive_box(model, l, cfg);
      inertial_box = *primitive;
    }
    os << "  <link name=\"" << name << "\">\n";
    write_inertial(os, inertial_box, cfg);
    write_geometry(os, "visual", name, primitive, cfg);
    write_geometry(os, "collision", name, primitive, cfg);
    os << "  </link>\n";
    ++doc.links;
  }

  for (int j = 0; j < kNumJoints; ++j) {
    const JointSpec& js = model.joint(j);
    const Vector3 xyz = js.origin - model.link_origin(model.parent_link(j));
    if (const auto* two = std::get_if<TwoDof>(&js.dof)) {
      const std::string mid = js.name + "_abd_link";
      os << "  <link name=\"" << mid << "\"/>\n";
      ++doc.links;
      write_revolute(os, js.name + "_abd", js.parent, mid, xyz, two->abduction_axis, two->abduction_limits, cfg);
      write_revolute(os, js.name + "_flex", mid, js.child, Vector3::Zero(), two->flexion_axis, two->flexion_limits, cfg);
      doc.revolute_joints += 2;
    } else {
      const auto& one = std::get<OneDof>(js.dof);
      write_revolute(os, js.name, js.parent, js.child, xyz, one.axis, one.limits, cfg);
      doc.revolute_joints += 1;
    }
  }
  os << "</robot>\n";
  doc.xml = os.str();
  return doc;
}

}  // namespace handrig
