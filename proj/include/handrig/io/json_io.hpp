#pragma once

// JSON documents: skeleton, model description, limits and pose sequences.

#include <cmath>
#include <cstddef>
#include <fstream>
#include <functional>
#include <initializer_list>
#include <iterator>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "handrig/error.hpp"
#include "handrig/hand_model.hpp"

namespace handrig::io {

using Json = nlohmann::json;

/// Input file could not be opened or read.
class IoError : public Error {
 public:
  using Error::Error;
};

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open \"" + path + "\"");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write \"" + path + "\"");
  out << content;
  if (!out) throw IoError("write to \"" + path + "\" failed");
}

/// Parses JSON; syntax errors surface as SchemaError carrying the parser's
/// line/column message.
inline Json parse_json(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw SchemaError(source + ": " + e.what());
  }
}

inline void reject_unknown_keys(const Json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw SchemaError(where + " must be a JSON object");
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const char* k : allowed) ok = ok || item.key() == k;
    if (!ok) throw SchemaError(where + ": unknown key \"" + item.key() + "\"");
  }
}

inline Vector3 vector3_from_json(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) throw SchemaError(where + " must be an array of 3 numbers");
  Vector3 v;
  for (int i = 0; i < 3; ++i) {
    if (!j[static_cast<std::size_t>(i)].is_number()) throw SchemaError(where + " must be an array of 3 numbers");
    v[i] = j[static_cast<std::size_t>(i)].get<double>();
  }
  if (!v.allFinite()) throw SchemaError(where + " is not finite");
  return v;
}

inline Json vector3_to_json(const Vector3& v) { return Json::array({v.x(), v.y(), v.z()}); }

inline JointLimits limits_from_json(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw SchemaError(where + " must be [lower, upper]");
  }
  JointLimits l{j[0].get<double>(), j[1].get<double>()};
  if (!(l.lower < l.upper)) throw SchemaError(where + ": lower must be < upper");
  return l;
}

inline Json limits_to_json(const JointLimits& l) { return Json::array({l.lower, l.upper}); }

// ---------------------------------------------------------------------------
// Skeleton
//
// {
//   "handedness": "right",            // "right" | "left"
//   "frame": "wrist",                 // optional: "wrist" (default) | "world"
//   "units": "m",                     // optional, meters only
//   "description": "...",             // optional, ignored
//   "keypoints": { "wrist": [x, y, z], "thumb_cmc": [...], ... 21 names }
// }
//
// frame = "world" runs align_to_wrist_frame on load.
// ---------------------------------------------------------------------------

inline HandSkeleton skeleton_from_json(const Json& doc) {
  reject_unknown_keys(doc, {"handedness", "frame", "units", "description", "keypoints"}, "skeleton");
  if (!doc.contains("handedness") || !doc["handedness"].is_string()) throw SchemaError("skeleton: \"handedness\" string required");
  if (!doc.contains("keypoints") || !doc["keypoints"].is_object()) throw SchemaError("skeleton: \"keypoints\" object required");
  if (doc.contains("units") && doc["units"] != "m") throw SchemaError("skeleton: units must be \"m\"");
  std::string frame = "wrist";
  if (doc.contains("frame")) {
    if (!doc["frame"].is_string()) throw SchemaError("skeleton: \"frame\" must be a string");
    frame = doc["frame"].get<std::string>();
    if (frame != "wrist" && frame != "world") throw SchemaError("skeleton: frame must be \"wrist\" or \"world\"");
  }
  std::map<std::string, Vector3> named;
  for (const auto& item : doc["keypoints"].items()) {
    named[item.key()] = vector3_from_json(item.value(), "keypoint \"" + item.key() + "\"");
  }
  HandSkeleton skel = HandSkeleton::from_named(named, handedness_from_string(doc["handedness"].get<std::string>()));
  return frame == "world" ? align_to_wrist_frame(skel) : skel;
}

inline HandSkeleton load_skeleton(const std::string& path) {
  return skeleton_from_json(parse_json(read_text_file(path), path));
}

inline Json skeleton_to_json(const HandSkeleton& skel) {
  Json kp = Json::object();
  for (int i = 0; i < kNumKeypoints; ++i) kp[std::string(kKeypointNames[i])] = vector3_to_json(skel[i]);
  return Json{{"handedness", std::string(to_string(skel.handedness()))}, {"frame", "wrist"}, {"units", "m"}, {"keypoints", kp}};
}

// ---------------------------------------------------------------------------
// Limits
//
// { "flexion": [lo, hi], "abduction": [lo, hi], "thumb_cmc": [lo, hi],
//   "overrides": { "<dof name>": [lo, hi], ... } }      all keys optional
// ---------------------------------------------------------------------------

inline LimitsConfig limits_config_from_json(const Json& doc) {
  reject_unknown_keys(doc, {"flexion", "abduction", "thumb_cmc", "overrides"}, "limits");
  LimitsConfig cfg;
  if (doc.contains("flexion")) cfg.flexion = limits_from_json(doc["flexion"], "limits.flexion");
  if (doc.contains("abduction")) cfg.abduction = limits_from_json(doc["abduction"], "limits.abduction");
  if (doc.contains("thumb_cmc")) cfg.thumb_cmc = limits_from_json(doc["thumb_cmc"], "limits.thumb_cmc");
  if (doc.contains("overrides")) {
    if (!doc["overrides"].is_object()) throw SchemaError("limits.overrides must be an object");
    for (const auto& item : doc["overrides"].items()) {
      cfg.overrides[item.key()] = limits_from_json(item.value(), "limits.overrides." + item.key());
    }
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Model description (model.json)
// ---------------------------------------------------------------------------

inline constexpr const char* kModelFormat = "handrig-model";
inline constexpr int kModelFormatVersion = 1;

inline Json model_to_json(const HandModel& model) {
  Json joints = Json::array();
  for (const JointSpec& js : model.joints()) {
    Json j{{"name", js.name}, {"parent", js.parent}, {"child", js.child},
           {"origin", vector3_to_json(js.origin)}, {"distal", vector3_to_json(js.distal)}};
    if (const auto* two = std::get_if<TwoDof>(&js.dof)) {
      j["type"] = "two";
      j["abduction_axis"] = vector3_to_json(two->abduction_axis);
      j["flexion_axis"] = vector3_to_json(two->flexion_axis);
      j["abduction_limits"] = limits_to_json(two->abduction_limits);
      j["flexion_limits"] = limits_to_json(two->flexion_limits);
    } else {
      const auto& one = std::get<OneDof>(js.dof);
      j["type"] = "one";
      j["axis"] = vector3_to_json(one.axis);
      j["limits"] = limits_to_json(one.limits);
    }
    joints.push_back(std::move(j));
  }
  Json layout = Json::array();
  for (const DofSlot& s : model.dof_layout()) layout.push_back(s.name);
  return Json{{"format", kModelFormat},
              {"version", kModelFormatVersion},
              {"handedness", std::string(to_string(model.handedness()))},
              {"root_link", model.root_link()},
              {"root_origin", vector3_to_json(model.root_origin())},
              {"joints", joints},
              {"dof_layout", layout}};
}

inline HandModel model_from_json(const Json& doc) {
  reject_unknown_keys(doc, {"format", "version", "handedness", "root_link", "root_origin", "joints", "dof_layout"}, "model");
  if (doc.value("format", std::string()) != kModelFormat) throw SchemaError("model: format must be \"handrig-model\"");
  if (doc.value("version", 0) != kModelFormatVersion) throw SchemaError("model: unsupported version");
  if (!doc.contains("joints") || !doc["joints"].is_array()) throw SchemaError("model: \"joints\" array required");
  if (!doc.contains("root_link") || !doc["root_link"].is_string()) throw SchemaError("model: \"root_link\" string required");
  if (!doc.contains("root_origin")) throw SchemaError("model: \"root_origin\" required");
  std::vector<JointSpec> joints;
  for (const Json& j : doc["joints"]) {
    const std::string type = j.value("type", std::string());
    if (type == "two") {
      reject_unknown_keys(j, {"name", "parent", "child", "origin", "distal", "type", "abduction_axis", "flexion_axis",
                              "abduction_limits", "flexion_limits"}, "model joint");
    } else if (type == "one") {
      reject_unknown_keys(j, {"name", "parent", "child", "origin", "distal", "type", "axis", "limits"}, "model joint");
    } else {
      throw SchemaError("model joint: type must be \"one\" or \"two\"");
    }
    JointSpec js;
    for (const char* key : {"name", "parent", "child"}) {
      if (!j.contains(key) || !j[key].is_string()) throw SchemaError(std::string("model joint: \"") + key + "\" string required");
    }
    js.name = j["name"].get<std::string>();
    js.parent = j["parent"].get<std::string>();
    js.child = j["child"].get<std::string>();
    const std::string where = "joint \"" + js.name + "\"";
    auto field = [&](const char* key) -> const Json& {
      if (!j.contains(key)) throw SchemaError(where + ": \"" + key + "\" required");
      return j[key];
    };
    js.origin = vector3_from_json(field("origin"), where + ".origin");
    js.distal = vector3_from_json(field("distal"), where + ".distal");
    if (type == "two") {
      js.dof = TwoDof{vector3_from_json(field("abduction_axis"), where + ".abduction_axis"),
                      vector3_from_json(field("flexion_axis"), where + ".flexion_axis"),
                      limits_from_json(field("abduction_limits"), where + ".abduction_limits"),
                      limits_from_json(field("flexion_limits"), where + ".flexion_limits")};
    } else {
      js.dof = OneDof{vector3_from_json(field("axis"), where + ".axis"), limits_from_json(field("limits"), where + ".limits")};
    }
    joints.push_back(std::move(js));
  }
  const Handedness hand = handedness_from_string(doc.value("handedness", std::string("right")));
  HandModel model(std::move(joints), doc["root_link"].get<std::string>(),
                  vector3_from_json(doc["root_origin"], "model.root_origin"), hand);
  if (doc.contains("dof_layout")) {
    const Json& layout = doc["dof_layout"];
    bool same = layout.is_array() && layout.size() == model.dof_layout().size();
    for (std::size_t i = 0; same && i < layout.size(); ++i) {
      same = layout[i].is_string() && layout[i].get<std::string>() == model.dof_layout()[i].name;
    }
    if (!same) throw SchemaError("model: dof_layout does not match the joint list");
  }
  return model;
}

inline HandModel load_model(const std::string& path) { return model_from_json(parse_json(read_text_file(path), path)); }

// ---------------------------------------------------------------------------
// Pose sequences: [ [ [x,y,z] x 15 ], ... ]   (axis-angle, radians)
// ---------------------------------------------------------------------------

namespace detail {

/// SAX handler assembling one frame at a time.
class PoseSax : public nlohmann::json_sax<Json> {
 public:
  using FrameFn = std::function<void(std::size_t, const PoseFrame&)>;
  explicit PoseSax(FrameFn fn) : fn_(std::move(fn)) {}

  bool null() override { return fail("null"); }
  bool boolean(bool) override { return fail("boolean"); }
  bool number_integer(number_integer_t v) override { return number(static_cast<double>(v)); }
  bool number_unsigned(number_unsigned_t v) override { return number(static_cast<double>(v)); }
  bool number_float(number_float_t v, const string_t&) override { return number(v); }
  bool string(string_t&) override { return fail("string"); }
  bool binary(binary_t&) override { return fail("binary"); }
  bool start_object(std::size_t) override { return fail("object"); }
  bool key(string_t&) override { return fail("object key"); }
  bool end_object() override { return fail("object"); }

  bool start_array(std::size_t) override {
    ++depth_;
    if (depth_ > 3) return fail("nested array");
    if (depth_ == 2) joints_ = 0;
    if (depth_ == 3) comps_ = 0;
    return true;
  }

  bool end_array() override {
    if (depth_ == 3) {
      if (comps_ != 3) throw SchemaError(where() + " joint " + std::to_string(joints_) + " has " + std::to_string(comps_) + " components, expected 3");
      ++joints_;
    } else if (depth_ == 2) {
      if (joints_ != kNumJoints) {
        throw SchemaError("frame " + std::to_string(frames_) + " has " + std::to_string(joints_) + " joints, expected " + std::to_string(kNumJoints));
      }
      fn_(frames_, frame_);
      ++frames_;
    }
    --depth_;
    return true;
  }

  bool parse_error(std::size_t, const std::string&, const nlohmann::detail::exception& ex) override {
    throw SchemaError(std::string("pose file: ") + ex.what());
  }

  std::size_t frames() const { return frames_; }

 private:
  bool number(double v) {
    if (depth_ != 3) return fail("number");
    if (comps_ >= 3) throw SchemaError(where() + " joint " + std::to_string(joints_) + " has more than 3 components");
    if (joints_ >= kNumJoints) {
      throw SchemaError("frame " + std::to_string(frames_) + " has more than " + std::to_string(kNumJoints) + " joints");
    }
    if (!std::isfinite(v)) throw SchemaError(where() + " is not finite");
    frame_.joints[static_cast<std::size_t>(joints_)][comps_] = v;
    ++comps_;
    return true;
  }
  bool fail(const char* what) { throw SchemaError(where() + ": unexpected " + what + " (expected arrays of 15 [x,y,z])"); }
  std::string where() const { return "pose file frame " + std::to_string(frames_); }

  FrameFn fn_;
  PoseFrame frame_;
  int depth_ = 0;
  int joints_ = 0;
  int comps_ = 0;
  std::size_t frames_ = 0;
};

}  // namespace detail

/// Streams frames to `on_frame` without materializing the sequence.
/// Returns the frame count.
inline std::size_t stream_poses(std::istream& in, const std::function<void(std::size_t, const PoseFrame&)>& on_frame) {
  detail::PoseSax sax(on_frame);
  Json::sax_parse(in, &sax);
  return sax.frames();
}

inline std::size_t stream_poses_file(const std::string& path,
                                     const std::function<void(std::size_t, const PoseFrame&)>& on_frame) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open \"" + path + "\"");
  return stream_poses(in, on_frame);
}

inline std::vector<PoseFrame> load_poses(const std::string& path) {
  std::vector<PoseFrame> frames;
  stream_poses_file(path, [&](std::size_t, const PoseFrame& f) { frames.push_back(f); });
  return frames;
}

inline std::vector<PoseFrame> parse_poses(const std::string& text) {
  std::istringstream in(text);
  std::vector<PoseFrame> frames;
  stream_poses(in, [&](std::size_t, const PoseFrame& f) { frames.push_back(f); });
  return frames;
}

inline Json poses_to_json(const std::vector<PoseFrame>& poses) {
  Json arr = Json::array();
  for (const auto& p : poses) {
    Json frame = Json::array();
    for (const auto& v : p.joints) frame.push_back(vector3_to_json(v));
    arr.push_back(std::move(frame));
  }
  return arr;
}

}  // namespace handrig::io
