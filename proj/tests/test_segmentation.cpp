#include <gtest/gtest.h>

#include <fstream>
#include <set>

#include "handrig/segmentation.hpp"
#include "support.hpp"

using namespace handrig;
using handrig::testing::data_path;
using handrig::testing::fixture_mesh;
using handrig::testing::fixture_model;

namespace {

std::vector<int> ground_truth_labels() {
  std::ifstream in(data_path("fixture_hand_labels.txt"));
  std::vector<int> labels;
  int l = 0;
  while (in >> l) labels.push_back(l);
  return labels;
}

WeightRow one_hot(int l) {
  WeightRow w{};
  w[static_cast<std::size_t>(l)] = 1.0;
  return w;
}

// Tiny mesh: vertex i belongs to link labels[i].
SkinnedMesh tiny_mesh(const std::vector<int>& labels, const std::vector<Face>& faces) {
  SkinnedMesh m;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    m.vertices.emplace_back(0.01 * static_cast<double>(i), 0.0, 0.0);
    m.weights.push_back(one_hot(labels[i]));
  }
  m.faces = faces;
  return m;
}

}  // namespace

TEST(Fixture, SizesAndWeights) {
  const SkinnedMesh mesh = fixture_mesh();
  EXPECT_EQ(mesh.vertices.size(), 552u);
  EXPECT_EQ(mesh.faces.size(), 980u);
  EXPECT_EQ(mesh.weights.size(), mesh.vertices.size());
}

TEST(AssignVertices, MatchesBruteForceScanAndGroundTruth) {
  const SkinnedMesh mesh = fixture_mesh();
  const std::vector<int> labels = assign_vertices(mesh);
  const std::vector<int> truth = ground_truth_labels();
  ASSERT_EQ(truth.size(), labels.size());
  for (std::size_t v = 0; v < labels.size(); ++v) {
    const auto& w = mesh.weights[v];
    const auto it = std::max_element(w.begin(), w.end());  // first maximum
    EXPECT_EQ(labels[v], static_cast<int>(it - w.begin())) << v;
    EXPECT_EQ(labels[v], truth[v]) << v;
  }
}

TEST(AssignVertices, TiesGoToLowestLink) {
  SkinnedMesh m;
  m.vertices = {Vector3::Zero()};
  WeightRow w{};
  w[7] = 0.5;
  w[3] = 0.5;
  m.weights = {w};
  EXPECT_EQ(assign_vertices(m)[0], 3);
}

TEST(AssignVertices, RejectsBadWeights) {
  SkinnedMesh m = tiny_mesh({0, 1}, {});
  m.weights[1][1] = 0.7;
  EXPECT_THROW(assign_vertices(m), InvalidWeights);
  m.weights[1][1] = -0.1;
  m.weights[1][2] = 1.1;
  EXPECT_THROW(assign_vertices(m), InvalidWeights);
  m = tiny_mesh({0, 1}, {});
  m.weights.pop_back();
  EXPECT_THROW(assign_vertices(m), InvalidWeights);
}

TEST(AssignVertices, AcceptsSumWithinTolerance) {
  SkinnedMesh m = tiny_mesh({0}, {});
  m.weights[0][0] = 1.0 + 5e-7;
  EXPECT_NO_THROW(assign_vertices(m));
  m.weights[0][0] = 1.0 + 2e-6;
  EXPECT_THROW(assign_vertices(m), InvalidWeights);
}

TEST(FaceLabel, MajorityThenLowest) {
  const std::vector<int> labels = {4, 4, 5, 6, 2};
  EXPECT_EQ(face_label(labels, {0, 1, 2}), 4);
  EXPECT_EQ(face_label(labels, {2, 0, 1}), 4);
  EXPECT_EQ(face_label(labels, {2, 3, 4}), 2);
  EXPECT_EQ(face_label(labels, {0, 2, 3}), 4);
}

TEST(Split, EveryVertexOwnedExactlyOnce) {
  const SkinnedMesh mesh = fixture_mesh();
  const Segmentation seg = segment_mesh(mesh, fixture_model());
  std::vector<int> owners(mesh.vertices.size(), 0);
  std::size_t faces = 0;
  for (const auto& s : seg.segments) {
    for (int v : s.source_indices) ++owners[static_cast<std::size_t>(v)];
    faces += s.faces.size();
  }
  for (std::size_t v = 0; v < owners.size(); ++v) EXPECT_EQ(owners[v], 1) << v;
  EXPECT_EQ(faces, mesh.faces.size());
  EXPECT_TRUE(seg.warnings.empty());
}

TEST(Split, SegmentsInLinkFrame) {
  const SkinnedMesh mesh = fixture_mesh();
  const HandModel model = fixture_model();
  const Segmentation seg = segment_mesh(mesh, model);
  for (int l = 0; l < kNumLinks; ++l) {
    const RigidSegment& s = seg.segments[static_cast<std::size_t>(l)];
    EXPECT_EQ(s.link, kLinkNames[static_cast<std::size_t>(l)]);
    for (std::size_t i = 0; i < s.source_indices.size(); ++i) {
      const Vector3 world = mesh.vertices[static_cast<std::size_t>(s.source_indices[i])];
      EXPECT_LT((s.vertices[i] + model.link_origin(l) - world).norm(), 1e-15);
    }
    for (std::size_t i = 0; i < s.borrowed_indices.size(); ++i) {
      const Vector3 world = mesh.vertices[static_cast<std::size_t>(s.borrowed_indices[i])];
      EXPECT_LT((s.vertices[s.source_indices.size() + i] + model.link_origin(l) - world).norm(), 1e-15);
    }
  }
}

TEST(Split, FacesPreserveGeometry) {
  const SkinnedMesh mesh = fixture_mesh();
  const HandModel model = fixture_model();
  const Segmentation seg = segment_mesh(mesh, model);
  // Every output face, mapped back to world coordinates, is an input face.
  std::set<std::array<int, 3>> input;
  for (const Face& f : mesh.faces) input.insert(f);
  for (const auto& s : seg.segments) {
    std::vector<int> to_mesh = s.source_indices;
    to_mesh.insert(to_mesh.end(), s.borrowed_indices.begin(), s.borrowed_indices.end());
    ASSERT_EQ(to_mesh.size(), s.vertices.size());
    for (const Face& f : s.faces) {
      const Face back{to_mesh[static_cast<std::size_t>(f[0])], to_mesh[static_cast<std::size_t>(f[1])],
                      to_mesh[static_cast<std::size_t>(f[2])]};
      EXPECT_TRUE(input.count(back));
    }
  }
}

TEST(Split, MixedFaceBorrowsForeignVertexOnce) {
  // Vertices 0,1 on link 4, vertex 2 on link 5; two faces share vertex 2.
  const SkinnedMesh m = tiny_mesh({4, 4, 5, 4}, {{0, 1, 2}, {1, 3, 2}});
  const Segmentation seg = segment_mesh(m, fixture_model());
  const RigidSegment& s4 = seg.segments[4];
  EXPECT_EQ(s4.source_indices, (std::vector<int>{0, 1, 3}));
  EXPECT_EQ(s4.borrowed_indices, (std::vector<int>{2}));
  ASSERT_EQ(s4.faces.size(), 2u);
  EXPECT_EQ(s4.faces[0], (Face{0, 1, 3}));
  EXPECT_EQ(s4.faces[1], (Face{1, 2, 3}));
  EXPECT_EQ(seg.segments[5].source_indices, (std::vector<int>{2}));
  EXPECT_TRUE(seg.segments[5].faces.empty());
}

TEST(Split, EmptySegmentsWarn) {
  const SkinnedMesh m = tiny_mesh({0, 0, 0}, {{0, 1, 2}});
  const Segmentation seg = segment_mesh(m, fixture_model());
  EXPECT_EQ(seg.warnings.size(), 15u);
}

TEST(Split, RejectsFaceOutOfRange) {
  const SkinnedMesh m = tiny_mesh({0, 0, 0}, {{0, 1, 3}});
  EXPECT_THROW(segment_mesh(m, fixture_model()), SchemaError);
}
