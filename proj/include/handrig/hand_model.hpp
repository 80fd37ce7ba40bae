#pragma once

// Rigid 16-link / 20-DOF hand built from 21 rest-pose keypoints.
//
// Frame convention: every joint frame has the wrist orientation at rest, so
// joint axes are stored in wrist coordinates and joint origins are the
// keypoint positions themselves.

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "handrig/error.hpp"
#include "handrig/projection.hpp"
#include "handrig/rotation.hpp"

namespace handrig {

inline constexpr int kNumKeypoints = 21;
inline constexpr int kNumJoints = 15;
inline constexpr int kNumLinks = 16;
inline constexpr int kNumDofs = 20;
inline constexpr int kNumFingers = 5;

/// Tilt of the thumb MCP/IP flexion axis about the thumb segment, radians.
inline constexpr double kThumbTilt = 0.96;

/// Minimum separation of keypoints along one finger chain, meters.
inline constexpr double kMinKeypointSeparation = 1e-3;

/// Cross products shorter than this cannot define an axis.
inline constexpr double kDegenerateCross = 1e-6;

enum class Finger { thumb = 0, index = 1, middle = 2, ring = 3, pinky = 4 };

enum class Handedness { right, left };

inline constexpr std::array<std::string_view, kNumFingers> kFingerNames = {
    "thumb", "index", "middle", "ring", "pinky"};

/// Canonical keypoint names: wrist, then per finger root, two joints, tip.
inline constexpr std::array<std::string_view, kNumKeypoints> kKeypointNames = {
    "wrist",
    "thumb_cmc", "thumb_mcp", "thumb_ip", "thumb_tip",
    "index_mcp", "index_pip", "index_dip", "index_tip",
    "middle_mcp", "middle_pip", "middle_dip", "middle_tip",
    "ring_mcp", "ring_pip", "ring_dip", "ring_tip",
    "pinky_mcp", "pinky_pip", "pinky_dip", "pinky_tip"};

/// Joints in model order; PoseFrame entries follow this order.
inline constexpr std::array<std::string_view, kNumJoints> kJointNames = {
    "thumb_cmc", "thumb_mcp", "thumb_ip",
    "index_mcp", "index_pip", "index_dip",
    "middle_mcp", "middle_pip", "middle_dip",
    "ring_mcp", "ring_pip", "ring_dip",
    "pinky_mcp", "pinky_pip", "pinky_dip"};

/// Links: palm first, then the child link of each joint in joint order.
inline constexpr std::array<std::string_view, kNumLinks> kLinkNames = {
    "palm",
    "thumb_metacarpal", "thumb_proximal", "thumb_distal",
    "index_proximal", "index_middle", "index_distal",
    "middle_proximal", "middle_middle", "middle_distal",
    "ring_proximal", "ring_middle", "ring_distal",
    "pinky_proximal", "pinky_middle", "pinky_distal"};

/// MANO orders its 15 pose joints index, middle, pinky, ring, thumb.
/// kManoToModel[i] is the model joint index of MANO joint i.
inline constexpr std::array<int, kNumJoints> kManoToModel = {
    3, 4, 5, 6, 7, 8, 12, 13, 14, 9, 10, 11, 0, 1, 2};

inline constexpr int keypoint_index(Finger f, int level) {
  return 1 + 4 * static_cast<int>(f) + level;
}

inline std::string_view to_string(Handedness h) { return h == Handedness::right ? "right" : "left"; }

inline Handedness handedness_from_string(std::string_view s) {
  if (s == "right") return Handedness::right;
  if (s == "left") return Handedness::left;
  throw SchemaError("handedness must be \"right\" or \"left\", got \"" + std::string(s) + "\"");
}

/// 21 rest-pose keypoints in meters, wrist frame.
class HandSkeleton {
 public:
  HandSkeleton() { points_.fill(Vector3::Zero()); }

  HandSkeleton(const std::array<Vector3, kNumKeypoints>& points, Handedness handedness)
      : points_(points), handedness_(handedness) {
    validate();
  }

  /// Named lookup; every canonical name must be present, extra names are
  /// rejected.
  static HandSkeleton from_named(const std::map<std::string, Vector3>& named, Handedness handedness) {
    std::array<Vector3, kNumKeypoints> pts;
    for (int i = 0; i < kNumKeypoints; ++i) {
      const auto it = named.find(std::string(kKeypointNames[i]));
      if (it == named.end()) throw SchemaError("missing keypoint \"" + std::string(kKeypointNames[i]) + "\"");
      pts[i] = it->second;
    }
    if (named.size() != static_cast<std::size_t>(kNumKeypoints)) {
      for (const auto& [name, _] : named) {
        bool known = false;
        for (auto k : kKeypointNames) known = known || (k == name);
        if (!known) throw SchemaError("unknown keypoint \"" + name + "\"");
      }
    }
    return HandSkeleton(pts, handedness);
  }

  const Vector3& operator[](int i) const { return points_.at(static_cast<std::size_t>(i)); }
  const Vector3& at(Finger f, int level) const { return (*this)[keypoint_index(f, level)]; }
  const Vector3& wrist() const { return points_[0]; }
  const std::array<Vector3, kNumKeypoints>& points() const { return points_; }
  Handedness handedness() const { return handedness_; }

 private:
  void validate() const {
    for (int i = 0; i < kNumKeypoints; ++i) {
      if (!points_[i].allFinite()) {
        throw SchemaError("keypoint \"" + std::string(kKeypointNames[i]) + "\" is not finite");
      }
    }
    for (int f = 0; f < kNumFingers; ++f) {
      for (int a = 0; a < 4; ++a) {
        for (int b = a + 1; b < 4; ++b) {
          const int ia = keypoint_index(static_cast<Finger>(f), a);
          const int ib = keypoint_index(static_cast<Finger>(f), b);
          if ((points_[ia] - points_[ib]).norm() < kMinKeypointSeparation) {
            throw DegenerateGeometry("keypoints \"" + std::string(kKeypointNames[ia]) + "\" and \"" +
                                     std::string(kKeypointNames[ib]) + "\" are closer than 1 mm");
          }
        }
      }
    }
  }

  std::array<Vector3, kNumKeypoints> points_{};
  Handedness handedness_ = Handedness::right;
};

/// Re-expresses an arbitrary-frame skeleton in the wrist frame: origin at
/// the wrist, +x toward the index/pinky MCP midpoint, +y along the palm
/// normal (index x pinky offsets), +z completing a right-handed frame.
inline HandSkeleton align_to_wrist_frame(const HandSkeleton& skel) {
  const Vector3 w = skel.wrist();
  const Vector3 to_index = skel.at(Finger::index, 0) - w;
  const Vector3 to_pinky = skel.at(Finger::pinky, 0) - w;
  const Vector3 forward = 0.5 * (to_index + to_pinky);
  const Vector3 normal = to_index.cross(to_pinky);
  if (forward.norm() < kDegenerateCross || normal.norm() < kDegenerateCross) {
    throw DegenerateGeometry("wrist and palm keypoints do not span a plane");
  }
  const Vector3 x = forward.normalized();
  const Vector3 y = (normal - normal.dot(x) * x).normalized();
  const Vector3 z = x.cross(y);
  Matrix3 basis;
  basis << x.transpose(), y.transpose(), z.transpose();
  std::array<Vector3, kNumKeypoints> pts;
  for (int i = 0; i < kNumKeypoints; ++i) pts[i] = basis * (skel[i] - w);
  return HandSkeleton(pts, skel.handedness());
}

struct AxisTriad {
  Vector3 x;
  Vector3 y;
  Vector3 z;
};

namespace detail {

inline Vector3 normalized_or_throw(const Vector3& v, const std::string& what) {
  const double n = v.norm();
  if (!(n >= kDegenerateCross)) throw DegenerateGeometry(what + " is degenerate (norm " + std::to_string(n) + ")");
  return v / n;
}

// z = normalize(direction), y = normalize(z x ref), x = normalize(y x z)
inline AxisTriad triad_from(const Vector3& direction, const Vector3& ref, const std::string& what) {
  AxisTriad t;
  t.z = normalized_or_throw(direction, what + " direction");
  t.y = normalized_or_throw(t.z.cross(ref), what + " direction x reference");
  t.x = normalized_or_throw(t.y.cross(t.z), what + " y x z");
  return t;
}

}  // namespace detail

/// Spread reference of a four-finger chain.
inline Vector3 finger_reference(const HandSkeleton& skel, Finger finger) {
  switch (finger) {
    case Finger::index:
      return Vector3::UnitZ();
    case Finger::middle:
      return skel.at(Finger::index, 0) - skel.at(Finger::ring, 0);
    case Finger::ring:
      return skel.at(Finger::middle, 0) - skel.at(Finger::ring, 0);
    case Finger::pinky:
      return skel.at(Finger::ring, 0) - skel.at(Finger::pinky, 0);
    case Finger::thumb:
      break;
  }
  throw std::invalid_argument("finger_reference: thumb has no spread reference");
}

/// Orthonormal right-handed triad of a four-finger chain, z from PIP - DIP.
inline AxisTriad finger_axes(const HandSkeleton& skel, Finger finger) {
  if (finger == Finger::thumb) throw std::invalid_argument("finger_axes: use thumb_cmc_axes for the thumb");
  const Vector3 direction = skel.at(finger, 1) - skel.at(finger, 2);
  return detail::triad_from(direction, finger_reference(skel, finger),
                            std::string(kFingerNames[static_cast<int>(finger)]));
}

struct ThumbCmcAxes {
  Vector3 y;  ///< normalize(thumb MCP - index MCP)
  Vector3 z;  ///< normalize(y x (thumb MCP - thumb IP))
};

inline ThumbCmcAxes thumb_cmc_axes(const HandSkeleton& skel) {
  const Vector3& thumb_mcp = skel.at(Finger::thumb, 1);
  const Vector3& thumb_ip = skel.at(Finger::thumb, 2);
  ThumbCmcAxes a;
  a.y = detail::normalized_or_throw(thumb_mcp - skel.at(Finger::index, 0), "thumb MCP - index MCP");
  a.z = detail::normalized_or_throw(a.y.cross(thumb_mcp - thumb_ip), "thumb CMC y x thumb segment");
  return a;
}

/// Which triad member carries abduction on the four fingers; flexion takes
/// the other one.
enum class AbductionAxis { y, x };

struct ThumbDistalAxes {
  Vector3 untilted;   ///< perpendicular axis before the tilt
  Vector3 direction;  ///< unit thumb segment direction (tilt axis)
  Vector3 mcp;        ///< thumb MCP flexion axis
  Vector3 ip;         ///< thumb IP flexion axis
};

/// Thumb MCP/IP flexion axes: the four-finger triad construction applied to
/// the CMC -> MCP segment with y_CMC as reference, then rotated about the
/// segment direction by `tilt` radians.
inline ThumbDistalAxes thumb_distal_axes(const HandSkeleton& skel, double tilt = kThumbTilt,
                                         AbductionAxis abduction = AbductionAxis::y) {
  const ThumbCmcAxes cmc = thumb_cmc_axes(skel);
  const Vector3 direction = skel.at(Finger::thumb, 0) - skel.at(Finger::thumb, 1);
  const AxisTriad t = detail::triad_from(direction, cmc.y, "thumb");
  ThumbDistalAxes out;
  out.direction = t.z;
  out.untilted = abduction == AbductionAxis::y ? t.x : t.y;
  const Vector3 tilted = (exp_so3(tilt * t.z) * out.untilted).normalized();
  out.mcp = tilted;
  out.ip = tilted;
  return out;
}

struct JointLimits {
  double lower = 0.0;
  double upper = 0.0;

  double clamp(double v) const { return v < lower ? lower : (v > upper ? upper : v); }
  bool contains(double v) const { return v >= lower && v <= upper; }
};

struct OneDof {
  Vector3 axis;
  JointLimits limits;
};

struct TwoDof {
  Vector3 abduction_axis;
  Vector3 flexion_axis;
  JointLimits abduction_limits;
  JointLimits flexion_limits;
};

struct JointSpec {
  std::string name;
  std::string parent;  ///< parent link
  std::string child;   ///< child link
  Vector3 origin;      ///< rest-pose joint location, wrist frame
  Vector3 distal;      ///< next keypoint along the chain (link end)
  std::variant<OneDof, TwoDof> dof;

  bool is_two_dof() const { return std::holds_alternative<TwoDof>(dof); }
  int dof_count() const { return is_two_dof() ? 2 : 1; }
};

struct DofSlot {
  int joint = 0;
  int dof_index = 0;  ///< 0 = abduction (or the single DOF), 1 = flexion
  std::string name;
};

/// Axis-angle rotation per joint, model joint order. Default is the zero pose.
struct PoseFrame {
  std::array<Vector3, kNumJoints> joints;

  PoseFrame() { joints.fill(Vector3::Zero()); }
};

struct JointAngleVector {
  std::array<double, kNumDofs> values{};

  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
};

struct LinkPose {
  Rotation rotation;
  Vector3 position = Vector3::Zero();
};

/// Kinematic tree of 15 joints (5 two-DOF, 10 one-DOF) and 16 links.
/// Immutable after construction.
class HandModel {
 public:
  HandModel(std::vector<JointSpec> joints, std::string root_link, Vector3 root_origin,
            Handedness handedness = Handedness::right)
      : joints_(std::move(joints)),
        root_link_(std::move(root_link)),
        root_origin_(std::move(root_origin)),
        handedness_(handedness) {
    audit();
  }

  const std::vector<JointSpec>& joints() const { return joints_; }
  const JointSpec& joint(int i) const { return joints_.at(static_cast<std::size_t>(i)); }
  const std::string& root_link() const { return root_link_; }
  const Vector3& root_origin() const { return root_origin_; }
  Handedness handedness() const { return handedness_; }
  const std::vector<DofSlot>& dof_layout() const { return layout_; }
  const std::vector<std::string>& link_names() const { return links_; }

  int two_dof_count() const { return two_dof_; }
  int one_dof_count() const { return static_cast<int>(joints_.size()) - two_dof_; }
  int link_count() const { return static_cast<int>(links_.size()); }
  int dof_count() const { return static_cast<int>(layout_.size()); }

  /// Index of the first DOF slot of joint `j`.
  int first_slot(int j) const { return first_slot_.at(static_cast<std::size_t>(j)); }
  /// Link index (into link_names) of the parent of joint `j`; 0 is the root.
  int parent_link(int j) const { return parent_link_.at(static_cast<std::size_t>(j)); }
  /// Rest-pose origin of link `l` (root origin for the root link).
  const Vector3& link_origin(int l) const {
    return l == 0 ? root_origin_ : joints_.at(static_cast<std::size_t>(l - 1)).origin;
  }

  std::optional<int> find_link(std::string_view name) const {
    for (std::size_t i = 0; i < links_.size(); ++i) {
      if (links_[i] == name) return static_cast<int>(i);
    }
    return std::nullopt;
  }

 private:
  void audit() {
    if (joints_.size() != static_cast<std::size_t>(kNumJoints)) {
      throw SchemaError("hand model needs " + std::to_string(kNumJoints) + " joints, got " +
                        std::to_string(joints_.size()));
    }
    if (!root_origin_.allFinite()) throw SchemaError("root origin is not finite");
    links_ = {root_link_};
    two_dof_ = 0;
    for (std::size_t j = 0; j < joints_.size(); ++j) {
      const JointSpec& js = joints_[j];
      if (!js.origin.allFinite() || !js.distal.allFinite()) throw SchemaError("joint \"" + js.name + "\" has non-finite geometry");
      for (std::size_t k = 0; k < j; ++k) {
        if (joints_[k].name == js.name) throw SchemaError("duplicate joint name \"" + js.name + "\"");
      }
      for (const auto& l : links_) {
        if (l == js.child) throw SchemaError("link \"" + js.child + "\" has two parents (or closes a cycle)");
      }
      int parent = -1;
      for (std::size_t l = 0; l < links_.size(); ++l) {
        if (links_[l] == js.parent) parent = static_cast<int>(l);
      }
      if (parent < 0) throw SchemaError("joint \"" + js.name + "\" references unknown parent link \"" + js.parent + "\"");
      parent_link_.push_back(parent);
      links_.push_back(js.child);

      first_slot_.push_back(static_cast<int>(layout_.size()));
      auto check_limits = [&](const JointLimits& lim) {
        if (!(lim.lower < lim.upper)) throw SchemaError("joint \"" + js.name + "\" has lower limit >= upper limit");
      };
      if (const auto* two = std::get_if<TwoDof>(&js.dof)) {
        ++two_dof_;
        require_unit(two->abduction_axis, ("joint " + js.name + " abduction axis").c_str());
        require_unit(two->flexion_axis, ("joint " + js.name + " flexion axis").c_str());
        if (!(std::abs(two->abduction_axis.dot(two->flexion_axis)) < 1.0 - kParallelTol)) {
          throw ParallelAxes("joint \"" + js.name + "\" has parallel axes");
        }
        check_limits(two->abduction_limits);
        check_limits(two->flexion_limits);
        layout_.push_back({static_cast<int>(j), 0, js.name + "_abd"});
        layout_.push_back({static_cast<int>(j), 1, js.name + "_flex"});
      } else {
        const auto& one = std::get<OneDof>(js.dof);
        require_unit(one.axis, ("joint " + js.name + " axis").c_str());
        check_limits(one.limits);
        layout_.push_back({static_cast<int>(j), 0, js.name});
      }
    }
    if (two_dof_ != 5) throw SchemaError("hand model needs 5 two-DOF joints, got " + std::to_string(two_dof_));
    if (link_count() != kNumLinks || dof_count() != kNumDofs) {
      throw SchemaError("hand model needs 16 links and 20 DOFs");
    }
  }

  std::vector<JointSpec> joints_;
  std::string root_link_;
  Vector3 root_origin_;
  Handedness handedness_;
  std::vector<std::string> links_;
  std::vector<DofSlot> layout_;
  std::vector<int> first_slot_;
  std::vector<int> parent_link_;
  int two_dof_ = 0;
};

struct LimitsConfig {
  JointLimits flexion{-0.35, 1.92};
  JointLimits abduction{-0.52, 0.52};
  JointLimits thumb_cmc{-1.05, 1.05};
  /// Per-DOF overrides keyed by DOF slot name (e.g. "index_pip", "thumb_cmc_abd").
  std::map<std::string, JointLimits> overrides;

  JointLimits resolve(const std::string& dof_name, const JointLimits& fallback) const {
    const auto it = overrides.find(dof_name);
    return it == overrides.end() ? fallback : it->second;
  }
};

struct ModelConfig {
  LimitsConfig limits;
  AbductionAxis abduction_axis = AbductionAxis::y;
  double thumb_tilt = kThumbTilt;
};

/// Builds the 15-joint model. Four-finger MCPs and the thumb CMC are two-DOF;
/// interphalangeal joints and the thumb MCP are one-DOF flexion joints.
inline HandModel build_hand_model(const HandSkeleton& skel, const ModelConfig& cfg = {}) {
  std::vector<JointSpec> joints;
  joints.reserve(kNumJoints);
  const LimitsConfig& lim = cfg.limits;

  auto add_joint = [&](Finger f, int level, std::variant<OneDof, TwoDof> dof) {
    const int j = static_cast<int>(joints.size());
    JointSpec js;
    js.name = std::string(kJointNames[j]);
    js.parent = level == 0 ? std::string(kLinkNames[0]) : std::string(kLinkNames[j]);
    js.child = std::string(kLinkNames[j + 1]);
    js.origin = skel.at(f, level);
    js.distal = skel.at(f, level + 1);
    js.dof = std::move(dof);
    joints.push_back(std::move(js));
  };

  // Thumb: CMC abducts about z_CMC (palm normal side) and flexes about y_CMC.
  const ThumbCmcAxes cmc = thumb_cmc_axes(skel);
  const ThumbDistalAxes distal = thumb_distal_axes(skel, cfg.thumb_tilt, cfg.abduction_axis);
  add_joint(Finger::thumb, 0,
            TwoDof{cmc.z, cmc.y, lim.resolve("thumb_cmc_abd", lim.thumb_cmc),
                   lim.resolve("thumb_cmc_flex", lim.thumb_cmc)});
  add_joint(Finger::thumb, 1, OneDof{distal.mcp, lim.resolve("thumb_mcp", lim.flexion)});
  add_joint(Finger::thumb, 2, OneDof{distal.ip, lim.resolve("thumb_ip", lim.flexion)});

  for (Finger f : {Finger::index, Finger::middle, Finger::ring, Finger::pinky}) {
    const AxisTriad t = finger_axes(skel, f);
    const Vector3& abd = cfg.abduction_axis == AbductionAxis::y ? t.y : t.x;
    const Vector3& flex = cfg.abduction_axis == AbductionAxis::y ? t.x : t.y;
    const std::string base(kFingerNames[static_cast<int>(f)]);
    add_joint(f, 0,
              TwoDof{abd, flex, lim.resolve(base + "_mcp_abd", lim.abduction),
                     lim.resolve(base + "_mcp_flex", lim.flexion)});
    add_joint(f, 1, OneDof{flex, lim.resolve(base + "_pip", lim.flexion)});
    add_joint(f, 2, OneDof{flex, lim.resolve(base + "_dip", lim.flexion)});
  }
  return HandModel(std::move(joints), std::string(kLinkNames[0]), skel.wrist(), skel.handedness());
}

/// Local rotation of joint `j` for the angles stored in `q`.
inline Rotation joint_rotation(const HandModel& model, int j, const JointAngleVector& q) {
  const JointSpec& js = model.joint(j);
  const auto slot = static_cast<std::size_t>(model.first_slot(j));
  if (const auto* two = std::get_if<TwoDof>(&js.dof)) {
    return reconstruct_2dof(two->abduction_axis, two->flexion_axis, q[slot], q[slot + 1]);
  }
  return exp_so3(q[slot] * std::get<OneDof>(js.dof).axis);
}

/// World pose of every link (link_names order). The root sits at identity
/// rotation on the wrist keypoint; q = 0 reproduces the rest pose.
inline std::vector<LinkPose> forward_kinematics(const HandModel& model, const JointAngleVector& q) {
  std::vector<LinkPose> poses(static_cast<std::size_t>(model.link_count()));
  poses[0].position = model.root_origin();
  for (int j = 0; j < kNumJoints; ++j) {
    const int parent = model.parent_link(j);
    const LinkPose& p = poses[static_cast<std::size_t>(parent)];
    LinkPose& child = poses[static_cast<std::size_t>(j + 1)];
    child.position = p.position + p.rotation * (model.joint(j).origin - model.link_origin(parent));
    child.rotation = p.rotation * joint_rotation(model, j, q);
  }
  return poses;
}

/// World position of a rest-pose point rigidly attached to link `l`.
inline Vector3 transform_point(const HandModel& model, const std::vector<LinkPose>& poses, int l,
                               const Vector3& rest_point) {
  const LinkPose& p = poses.at(static_cast<std::size_t>(l));
  return p.position + p.rotation * (rest_point - model.link_origin(l));
}

inline std::array<Rotation, kNumJoints> pose_to_rotations(const PoseFrame& pose) {
  std::array<Rotation, kNumJoints> out;
  for (int j = 0; j < kNumJoints; ++j) out[j] = exp_so3(pose.joints[j]);
  return out;
}

inline PoseFrame rotations_to_pose(const std::array<Rotation, kNumJoints>& rotations) {
  PoseFrame pose;
  for (int j = 0; j < kNumJoints; ++j) pose.joints[j] = log_so3(rotations[j]);
  return pose;
}

/// Reorders a MANO-ordered pose into model joint order.
inline PoseFrame from_mano_order(const PoseFrame& mano) {
  PoseFrame out;
  for (int i = 0; i < kNumJoints; ++i) out.joints[kManoToModel[i]] = mano.joints[i];
  return out;
}

}  // namespace handrig
