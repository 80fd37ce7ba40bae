#pragma once

// Rigid segmentation of a skinned rest mesh by maximal skinning weight.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "handrig/error.hpp"
#include "handrig/hand_model.hpp"

namespace handrig {

using Face = std::array<int, 3>;
using WeightRow = std::array<double, kNumLinks>;

inline constexpr double kWeightSumTol = 1e-6;

/// Rest mesh with one weight row per vertex over the 16 links
/// (palm, then the joint child links in model order).
struct SkinnedMesh {
  std::vector<Vector3> vertices;
  std::vector<Face> faces;
  std::vector<WeightRow> weights;

  void validate() const {
    if (weights.size() != vertices.size()) {
      throw InvalidWeights("weights have " + std::to_string(weights.size()) + " rows for " +
                           std::to_string(vertices.size()) + " vertices");
    }
    for (std::size_t v = 0; v < weights.size(); ++v) {
      double sum = 0.0;
      for (double w : weights[v]) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
          throw InvalidWeights("weight row " + std::to_string(v) + " has a negative or non-finite entry");
        }
        sum += w;
      }
      if (!(std::abs(sum - 1.0) <= kWeightSumTol)) {
        std::ostringstream os;
        os << "weight row " << v << " sums to " << sum << ", expected 1";
        throw InvalidWeights(os.str());
      }
    }
    const auto n = static_cast<int>(vertices.size());
    for (std::size_t f = 0; f < faces.size(); ++f) {
      for (int idx : faces[f]) {
        if (idx < 0 || idx >= n) throw SchemaError("face " + std::to_string(f) + " references vertex out of range");
      }
    }
  }
};

struct RigidSegment {
  std::string link;
  /// Owned vertices first, then copies of neighbor vertices pulled in by
  /// mixed faces. Coordinates are relative to the link origin.
  std::vector<Vector3> vertices;
  std::vector<Face> faces;  ///< indices into `vertices`
  std::vector<int> source_indices;    ///< mesh index of each owned vertex
  std::vector<int> borrowed_indices;  ///< mesh index of each duplicated vertex
};

struct Segmentation {
  std::array<RigidSegment, kNumLinks> segments;
  std::vector<std::string> warnings;  ///< one per empty segment
};

/// argmax over each weight row; ties go to the lowest link index.
inline std::vector<int> assign_vertices(const SkinnedMesh& mesh) {
  mesh.validate();
  std::vector<int> labels(mesh.weights.size());
  for (std::size_t v = 0; v < mesh.weights.size(); ++v) {
    int best = 0;
    for (int j = 1; j < kNumLinks; ++j) {
      if (mesh.weights[v][static_cast<std::size_t>(j)] > mesh.weights[v][static_cast<std::size_t>(best)]) best = j;
    }
    labels[v] = best;
  }
  return labels;
}

/// Label that owns a face: the shared label, else the 2-of-3 majority,
/// else the lowest of three distinct labels.
inline int face_label(const std::vector<int>& labels, const Face& f) {
  const int a = labels[static_cast<std::size_t>(f[0])];
  const int b = labels[static_cast<std::size_t>(f[1])];
  const int c = labels[static_cast<std::size_t>(f[2])];
  if (a == b || a == c) return a;
  if (b == c) return b;
  return std::min({a, b, c});
}

/// Splits the mesh into one segment per link and moves each into its link
/// frame (translation by -origin; frames are wrist-aligned).
inline Segmentation split_mesh(const SkinnedMesh& mesh, const std::vector<int>& labels, const HandModel& model) {
  if (labels.size() != mesh.vertices.size()) throw SchemaError("label count does not match vertex count");
  Segmentation out;
  std::vector<int> local(mesh.vertices.size(), -1);

  for (int l = 0; l < kNumLinks; ++l) {
    out.segments[static_cast<std::size_t>(l)].link = model.link_names()[static_cast<std::size_t>(l)];
  }
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    const int l = labels[v];
    if (l < 0 || l >= kNumLinks) throw SchemaError("vertex label out of range");
    RigidSegment& seg = out.segments[static_cast<std::size_t>(l)];
    local[v] = static_cast<int>(seg.vertices.size());
    seg.vertices.push_back(mesh.vertices[v] - model.link_origin(l));
    seg.source_indices.push_back(static_cast<int>(v));
  }

  // Mixed faces duplicate their foreign vertices into the owning segment,
  // once per (segment, vertex) pair.
  std::array<std::map<int, int>, kNumLinks> borrowed_lookup;
  for (const Face& f : mesh.faces) {
    const int l = face_label(labels, f);
    RigidSegment& seg = out.segments[static_cast<std::size_t>(l)];
    Face local_face{};
    for (int k = 0; k < 3; ++k) {
      const int v = f[static_cast<std::size_t>(k)];
      if (labels[static_cast<std::size_t>(v)] == l) {
        local_face[static_cast<std::size_t>(k)] = local[static_cast<std::size_t>(v)];
        continue;
      }
      auto& lookup = borrowed_lookup[static_cast<std::size_t>(l)];
      auto [it, inserted] = lookup.try_emplace(v, static_cast<int>(seg.vertices.size()));
      if (inserted) {
        seg.vertices.push_back(mesh.vertices[static_cast<std::size_t>(v)] - model.link_origin(l));
        seg.borrowed_indices.push_back(v);
      }
      local_face[static_cast<std::size_t>(k)] = it->second;
    }
    seg.faces.push_back(local_face);
  }

  for (const RigidSegment& seg : out.segments) {
    if (seg.source_indices.empty()) out.warnings.push_back("segment \"" + seg.link + "\" received no vertices");
  }
  return out;
}

inline Segmentation segment_mesh(const SkinnedMesh& mesh, const HandModel& model) {
  return split_mesh(mesh, assign_vertices(mesh), model);
}

}  // namespace handrig
