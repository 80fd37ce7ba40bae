#pragma once

// Wavefront OBJ (vertices + faces) and whitespace-separated weight files.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "handrig/io/json_io.hpp"
#include "handrig/segmentation.hpp"

namespace handrig::io {

struct ObjMesh {
  std::vector<Vector3> vertices;
  std::vector<Face> faces;
};

/// Reads `v` and `f` records; polygons are fan-triangulated, texture and
/// normal indices ignored, negative (relative) indices resolved.
inline ObjMesh parse_obj(std::istream& in, const std::string& source) {
  ObjMesh mesh;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    const std::string where = source + ":" + std::to_string(line_no);
    if (tag == "v") {
      Vector3 v;
      if (!(ls >> v.x() >> v.y() >> v.z())) throw SchemaError(where + ": malformed vertex");
      mesh.vertices.push_back(v);
    } else if (tag == "f") {
      std::vector<int> idx;
      std::string tok;
      while (ls >> tok) {
        const std::string head = tok.substr(0, tok.find('/'));
        int i = 0;
        try {
          i = std::stoi(head);
        } catch (const std::exception&) {
          throw SchemaError(where + ": malformed face index \"" + tok + "\"");
        }
        if (i < 0) i = static_cast<int>(mesh.vertices.size()) + i + 1;
        if (i < 1 || i > static_cast<int>(mesh.vertices.size())) throw SchemaError(where + ": face index out of range");
        idx.push_back(i - 1);
      }
      if (idx.size() < 3) throw SchemaError(where + ": face needs at least 3 vertices");
      for (std::size_t k = 1; k + 1 < idx.size(); ++k) mesh.faces.push_back({idx[0], idx[k], idx[k + 1]});
    }
  }
  return mesh;
}

inline ObjMesh load_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open \"" + path + "\"");
  return parse_obj(in, path);
}

inline std::string obj_to_string(const std::vector<Vector3>& vertices, const std::vector<Face>& faces,
                                 const std::string& comment = {}) {
  std::string out;
  if (!comment.empty()) out += "# " + comment + "\n";
  char buf[128];
  for (const auto& v : vertices) {
    std::snprintf(buf, sizeof buf, "v %.9g %.9g %.9g\n", v.x() == 0.0 ? 0.0 : v.x(), v.y() == 0.0 ? 0.0 : v.y(),
                  v.z() == 0.0 ? 0.0 : v.z());
    out += buf;
  }
  for (const auto& f : faces) {
    std::snprintf(buf, sizeof buf, "f %d %d %d\n", f[0] + 1, f[1] + 1, f[2] + 1);
    out += buf;
  }
  return out;
}

/// One row per vertex, exactly 16 whitespace-separated columns in link order
/// (palm, then joint child links). Other column counts are rejected.
inline std::vector<WeightRow> parse_weights(std::istream& in, const std::string& source) {
  std::vector<WeightRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::vector<double> vals;
    std::string tok;
    while (ls >> tok) {
      try {
        std::size_t used = 0;
        vals.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw InvalidWeights(source + ":" + std::to_string(line_no) + ": not a number \"" + tok + "\"");
      }
    }
    if (vals.empty()) continue;
    if (vals.size() != static_cast<std::size_t>(kNumLinks)) {
      throw InvalidWeights(source + ":" + std::to_string(line_no) + ": expected " + std::to_string(kNumLinks) +
                           " columns, got " + std::to_string(vals.size()));
    }
    WeightRow row{};
    std::copy(vals.begin(), vals.end(), row.begin());
    rows.push_back(row);
  }
  return rows;
}

inline std::vector<WeightRow> load_weights(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open \"" + path + "\"");
  return parse_weights(in, path);
}

inline SkinnedMesh load_skinned_mesh(const std::string& obj_path, const std::string& weights_path) {
  ObjMesh obj = load_obj(obj_path);
  SkinnedMesh mesh{std::move(obj.vertices), std::move(obj.faces), load_weights(weights_path)};
  mesh.validate();
  return mesh;
}

}  // namespace handrig::io
