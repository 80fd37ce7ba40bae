#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <set>

#include "handrig/io/json_io.hpp"
#include "support.hpp"
#include "urdf_reader.hpp"

namespace fs = std::filesystem;
using handrig::testing::data_path;
using handrig::testing::golden_path;
using handrig::testing::scratch_dir;
using handrig::testing::slurp;

namespace {

struct CliRun {
  int status = -1;
  std::string output;  // stdout and stderr interleaved
};

CliRun run(const fs::path& dir, const std::string& args) {
  const fs::path log = dir / "cli.log";
  const std::string cmd = std::string("\"") + HANDRIG_CLI + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int raw = std::system(cmd.c_str());
  CliRun r;
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.output = slurp(log.string());
  return r;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

std::string fixture_args() {
  return "--skeleton " + q(data_path("fixture_skeleton.json")) + " --mesh " + q(data_path("fixture_hand.obj")) +
         " --weights " + q(data_path("fixture_hand_weights.txt"));
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

std::string zero_pose_file(int frames) {
  std::string s = "[";
  for (int f = 0; f < frames; ++f) {
    s += f ? ",[" : "[";
    for (int j = 0; j < 15; ++j) s += j ? ",[0,0,0]" : "[0,0,0]";
    s += "]";
  }
  return s + "]";
}

}  // namespace

TEST(Cli, Version) {
  const fs::path dir = scratch_dir("cli_version");
  const CliRun r = run(dir, "--version");
  EXPECT_EQ(r.status, 0);
  EXPECT_EQ(r.output, "handrig 0.1.0\n");
}

TEST(Cli, MachineReadableHelp) {
  const fs::path dir = scratch_dir("cli_help");
  const CliRun r = run(dir, "--help-json");
  ASSERT_EQ(r.status, 0);
  const auto doc = handrig::io::Json::parse(r.output);
  std::set<std::string> subs;
  for (const auto& s : doc.at("subcommands")) subs.insert(s.at("name").get<std::string>());
  EXPECT_EQ(subs, (std::set<std::string>{"build-model", "project", "evaluate"}));
  for (const auto& s : doc.at("subcommands")) {
    for (const auto& o : s.at("options")) {
      if (o.at("name") == "--no-clamp") {
        EXPECT_FALSE(o.at("takes_value").get<bool>());
      }
      if (o.at("name") == "--model") {
        EXPECT_TRUE(o.at("takes_value").get<bool>());
      }
    }
  }
}

TEST(Cli, UnknownSubcommandIsUsageError) {
  const fs::path dir = scratch_dir("cli_unknown");
  EXPECT_EQ(run(dir, "frobnicate").status, 2);
  EXPECT_EQ(run(dir, "project --model").status, 2);
}

TEST(Cli, BuildModelProducesParsableUrdf) {
  const fs::path dir = scratch_dir("cli_build");
  const CliRun r = run(dir, "build-model " + fixture_args() + " --out " + q(dir / "model"));
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_NE(r.output.find("16 links, 20 DOFs"), std::string::npos) << r.output;
  const auto robot = urdf_reader::parse(slurp((dir / "model" / "hand.urdf").string()));
  EXPECT_EQ(robot.joints.size(), 20u);
  int meshes = 0;
  for (const auto& e : fs::directory_iterator(dir / "model" / "meshes")) meshes += e.path().extension() == ".obj";
  EXPECT_EQ(meshes, 16);
  for (const auto& [link, mesh] : robot.mesh_of) EXPECT_TRUE(fs::exists(dir / "model" / mesh)) << mesh;
  // The model file matches the checked-in golden copy.
  EXPECT_EQ(slurp((dir / "model" / "model.json").string()), slurp(golden_path("model.json")));
}

TEST(Cli, BuildModelIsIdempotent) {
  const fs::path dir = scratch_dir("cli_idem");
  ASSERT_EQ(run(dir, "build-model " + fixture_args() + " --out " + q(dir / "a")).status, 0);
  ASSERT_EQ(run(dir, "build-model " + fixture_args() + " --out " + q(dir / "a")).status, 0);
  ASSERT_EQ(run(dir, "build-model " + fixture_args() + " --out " + q(dir / "b")).status, 0);
  EXPECT_EQ(slurp((dir / "a" / "hand.urdf").string()), slurp((dir / "b" / "hand.urdf").string()));
  EXPECT_EQ(slurp((dir / "a" / "meshes" / "index_pip.obj").string()),
            slurp((dir / "b" / "meshes" / "index_pip.obj").string()));
}

TEST(Cli, MissingWeightsFallsBackToBoxes) {
  const fs::path dir = scratch_dir("cli_boxes");
  const CliRun r = run(dir, "build-model --skeleton " + q(data_path("fixture_skeleton.json")) + " --out " + q(dir / "m"));
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_NE(r.output.find("warning"), std::string::npos) << r.output;
  const std::string urdf = slurp((dir / "m" / "hand.urdf").string());
  EXPECT_NE(urdf.find("<box"), std::string::npos);
  EXPECT_EQ(urdf.find("<mesh"), std::string::npos);
  EXPECT_EQ(urdf_reader::parse(urdf).joints.size(), 20u);
}

TEST(Cli, MalformedSkeletonReportsPosition) {
  const fs::path dir = scratch_dir("cli_malformed");
  write_file(dir / "bad.json", "{\n  \"handedness\": \"right\",\n  \"keypoints\": {\n    \"wrist\": [0, 0 0]\n");
  const CliRun r = run(dir, "build-model --skeleton " + q(dir / "bad.json") + " --out " + q(dir / "m"));
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.output.find("line 4"), std::string::npos) << r.output;
  EXPECT_NE(r.output.find("column"), std::string::npos) << r.output;
  EXPECT_FALSE(fs::exists(dir / "m" / "model.json"));
}

TEST(Cli, MissingInputsAreUsageErrors) {
  const fs::path dir = scratch_dir("cli_missing");
  EXPECT_EQ(run(dir, "build-model --skeleton " + q(dir / "nope.json") + " --out " + q(dir / "m")).status, 2);
  EXPECT_EQ(run(dir, "project --model " + q(dir / "nomodel") + " --poses " + q(data_path("fixture_poses.json")) +
                         " --out " + q(dir / "a.csv"))
                .status,
            2);
  EXPECT_EQ(run(dir, "evaluate --model " + q(golden_path("")) + " --sample sideways --out " + q(dir / "m.csv")).status,
            2);
  EXPECT_EQ(run(dir, "evaluate --model " + q(golden_path("")) + " --sample off_manifold --methods bch,magic --out " +
                         q(dir / "m.csv"))
                .status,
            2);
  EXPECT_FALSE(fs::exists(dir / "a.csv"));
  EXPECT_FALSE(fs::exists(dir / "m.csv"));
}

TEST(Cli, ProjectMatchesGoldenAngles) {
  const fs::path dir = scratch_dir("cli_project");
  const std::string poses = data_path("fixture_poses.json");
  const std::string before = slurp(poses);
  const CliRun r = run(dir, "project --model " + q(golden_path("")) + " --poses " + q(poses) + " --method bch --out " +
                             q(dir / "angles.csv"));
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_EQ(slurp((dir / "angles.csv").string()), slurp(golden_path("fixture_angles_bch.csv")));
  EXPECT_EQ(slurp(poses), before);
}

TEST(Cli, ProjectZeroPoses) {
  const fs::path dir = scratch_dir("cli_zero");
  write_file(dir / "zero.json", zero_pose_file(3));
  for (const char* method : {"bch", "naive", "lsq"}) {
    const CliRun r = run(dir, "project --model " + q(golden_path("")) + " --poses " + q(dir / "zero.json") +
                               " --method " + method + " --out " + q(dir / "z.csv"));
    ASSERT_EQ(r.status, 0) << r.output;
    std::istringstream in(slurp((dir / "z.csv").string()));
    std::string line;
    std::getline(in, line);
    int rows = 0;
    while (std::getline(in, line)) {
      std::string expected = std::to_string(rows);
      for (int i = 0; i < 20; ++i) expected += ",0";
      EXPECT_EQ(line, expected + ",0") << method;
      ++rows;
    }
    EXPECT_EQ(rows, 3);
  }
}

TEST(Cli, ProjectRejectsWrongFrameShapeWithoutOutput) {
  const fs::path dir = scratch_dir("cli_shape");
  std::string text = zero_pose_file(2);
  text.replace(text.rfind(",[0,0,0]"), 8, "");  // second frame loses a joint
  write_file(dir / "short.json", text);
  const CliRun r = run(dir, "project --model " + q(golden_path("")) + " --poses " + q(dir / "short.json") + " --out " +
                             q(dir / "out.csv"));
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.output.find("frame 1 has 14 joints, expected 15"), std::string::npos) << r.output;
  EXPECT_FALSE(fs::exists(dir / "out.csv"));
  EXPECT_FALSE(fs::exists(dir / "out.csv.tmp"));
}

TEST(Cli, ProjectLsqLongSequence) {
  const fs::path dir = scratch_dir("cli_lsq");
  write_file(dir / "zero.json", zero_pose_file(1000));
  const CliRun r = run(dir, "project --model " + q(golden_path("")) + " --poses " + q(dir / "zero.json") +
                             " --method lsq --out " + q(dir / "z.csv"));
  ASSERT_EQ(r.status, 0) << r.output;
  const std::string csv = slurp((dir / "z.csv").string());
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1001);
}

TEST(Cli, EvaluateOffManifoldIsRegressionLocked) {
  const fs::path dir = scratch_dir("cli_eval");
  const std::string args = "evaluate --model " + q(golden_path("")) + " --sample off_manifold --n 100 --seed 42 " +
                           "--no-timing --threads 3 --out ";
  const CliRun r = run(dir, args + q(dir / "a.csv"));
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_NE(r.output.find("Mean Error"), std::string::npos);
  EXPECT_EQ(slurp((dir / "a.csv").string()), slurp(golden_path("metrics_off_manifold_seed42.csv")));
  ASSERT_EQ(run(dir, args + q(dir / "b.csv")).status, 0);
  EXPECT_EQ(slurp((dir / "a.csv").string()), slurp((dir / "b.csv").string()));
}

TEST(Cli, EvaluateOnManifoldRecovers) {
  const fs::path dir = scratch_dir("cli_on");
  const CliRun r = run(dir, "evaluate --model " + q(golden_path("")) + " --sample on_manifold --n 30 --out " +
                             q(dir / "m.csv") + " --per-joint-csv " + q(dir / "j.csv"));
  ASSERT_EQ(r.status, 0) << r.output;
  std::istringstream in(slurp((dir / "m.csv").string()));
  std::string line;
  std::getline(in, line);
  int methods = 0;
  while (std::getline(in, line)) {
    std::istringstream cells(line);
    std::string name, mean, max;
    std::getline(cells, name, ',');
    std::getline(cells, mean, ',');
    std::getline(cells, max, ',');
    // Only lsq inverts a composed two-DOF rotation; the linearized methods stay within a few degrees.
    EXPECT_LT(std::stod(max), name == "lsq" ? 0.1 : 15.0) << line;
    ++methods;
  }
  EXPECT_EQ(methods, 3);
  EXPECT_NE(r.output.find("closed-form 0.000"), std::string::npos) << r.output;
  // One-DOF joints are recovered exactly by every method.
  std::istringstream joints(slurp((dir / "j.csv").string()));
  std::getline(joints, line);
  int rows = 0;
  while (std::getline(joints, line)) {
    ++rows;
    if (line.find("_mcp,") != std::string::npos || line.find("_cmc,") != std::string::npos) continue;
    const std::size_t a = line.find(',', line.find(',') + 1);
    EXPECT_LT(std::stod(line.substr(line.find(',', a + 1) + 1)), 1e-6) << line;
  }
  EXPECT_EQ(rows, 45);
}

TEST(Cli, EvaluatePoseFile) {
  const fs::path dir = scratch_dir("cli_eval_file");
  const CliRun r = run(dir, "evaluate --model " + q(golden_path("")) + " --poses " + q(data_path("fixture_poses.json")) +
                             " --methods naive --no-timing --out " + q(dir / "m.csv"));
  ASSERT_EQ(r.status, 0) << r.output;
  const std::string csv = slurp((dir / "m.csv").string());
  EXPECT_NE(csv.find("\nnaive,"), std::string::npos);
  EXPECT_EQ(csv.find("\nbch,"), std::string::npos);
}

TEST(Cli, ConfigFile) {
  const fs::path dir = scratch_dir("cli_config");
  write_file(dir / "good.json", R"({"method": "naive", "projection": {"bch_iterations": 5}})");
  write_file(dir / "bad.json", R"({"metod": "naive"})");
  const std::string base = "project --model " + q(golden_path("")) + " --poses " + q(data_path("fixture_poses.json"));
  EXPECT_EQ(run(dir, base + " --config " + q(dir / "good.json") + " --out " + q(dir / "a.csv")).status, 0);
  const CliRun bad = run(dir, base + " --config " + q(dir / "bad.json") + " --out " + q(dir / "b.csv"));
  EXPECT_EQ(bad.status, 2);
  EXPECT_NE(bad.output.find("metod"), std::string::npos) << bad.output;
  // Command-line values win over config values.
  write_file(dir / "pin.json", R"({"method": "lsq"})");
  ASSERT_EQ(run(dir, base + " --config " + q(dir / "pin.json") + " --method bch --out " + q(dir / "c.csv")).status, 0);
  EXPECT_EQ(slurp((dir / "c.csv").string()), slurp(golden_path("fixture_angles_bch.csv")));
}
