// Drives the installed command line binary end to end through a shell and
// checks outputs, formats and exit codes. NBVOX_BIN is injected by the build.

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "testutil.hpp"

using namespace nbvox;

namespace {

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

RunResult run_cli(const std::string& args) {
  tt::TempDir capture;
  const std::string cmd = std::string(NBVOX_BIN) + " " + args + " > " +
                          capture.file("out") + " 2> " + capture.file("err");
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(capture.file("out"));
  r.err = slurp(capture.file("err"));
  return r;
}

std::string v3(const Vec3& v) {
  std::ostringstream ss;
  ss << v.x() << " " << v.y() << " " << v.z();
  return ss.str();
}

}  // namespace

TEST(Cli, HelpExitsZero) {
  EXPECT_EQ(run_cli("--help").code, 0);
  EXPECT_EQ(run_cli("render --help").code, 0);
}

TEST(Cli, MissingSubcommandFails) {
  EXPECT_NE(run_cli("").code, 0);
  EXPECT_NE(run_cli("render").code, 0);  // --mesh and --out are required
}

TEST(Cli, RenderWritesDepthPngAndCloud) {
  tt::TempDir dir;
  save_mesh(tt::box_mesh(0.2, 0.2, 0.2), dir.file("box.off"));
  const RunResult r = run_cli(
      "render --mesh " + dir.file("box.off") +
      " --pos 0.6 0 0 --look-at 0 0 0 --width 64 --height 48" +
      " --out " + dir.file("view") + " --png --cloud " + dir.file("pts.xyz"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("valid pixels"), std::string::npos);

  const DepthImage image = load_depth(dir.file("view"));
  EXPECT_EQ(image.camera.width, 64);
  EXPECT_EQ(image.camera.height, 48);
  // Center pixel hits the box face half an edge from the camera.
  EXPECT_NEAR(image.at(32, 24), 0.5f, 1e-3f);

  const PointCloud cloud = load_cloud_xyz(dir.file("pts.xyz"));
  EXPECT_GT(cloud.size(), 100u);

  const std::string png = slurp(dir.file("view.png"));
  ASSERT_GE(png.size(), 8u);
  EXPECT_EQ(static_cast<unsigned char>(png[1]), 'P');
}

TEST(Cli, RenderPanoramaWritesEightViews) {
  tt::TempDir dir;
  // Fine tessellation: rays hit flat triangle chords, so the hit distance
  // falls short of the radius by up to r * (1 - cos(pi/rings)); 32 rings
  // keep that under 2 mm.
  save_mesh(tt::uv_sphere(0.3, 32, 48), dir.file("orb.off"));
  const RunResult r = run_cli("render --mesh " + dir.file("orb.off") +
                              " --pos 0 0 0 --panorama --width 32" +
                              " --height 24 --out " + dir.file("pano"));
  ASSERT_EQ(r.code, 0) << r.err;
  for (int k = 0; k < 8; ++k) {
    char suffix[16];
    std::snprintf(suffix, sizeof(suffix), "_%03d", k * 45);
    const DepthImage image = load_depth(dir.file("pano") + suffix);
    // Inside a sphere every ray hits near its radius.
    EXPECT_NEAR(image.at(16, 12), 0.3f, 0.01f);
  }
}

TEST(Cli, VoxelizeMeshToBinvox) {
  tt::TempDir dir;
  save_mesh(tt::box_mesh(0.1, 0.1, 0.1), dir.file("box.off"));
  const RunResult r = run_cli("voxelize --mesh " + dir.file("box.off") +
                              " --resolution 32 --out " +
                              dir.file("box.binvox"));
  ASSERT_EQ(r.code, 0) << r.err;
  const BinaryGrid grid = load_binvox(dir.file("box.binvox"));
  EXPECT_EQ(grid.spec.resolution, 32);
  EXPECT_GT(grid.count(), 1000u);
  EXPECT_NE(r.out.find("cells occupied"), std::string::npos);
}

TEST(Cli, VoxelizeCloudToBinvox) {
  tt::TempDir dir;
  PointCloud cloud;
  Rng rng(7);
  for (int i = 0; i < 500; ++i)
    cloud.points.push_back(tt::random_unit_vec(rng) * 0.05);
  save_cloud_xyz(cloud, dir.file("pts.xyz"));
  const RunResult r = run_cli("voxelize --cloud " + dir.file("pts.xyz") +
                              " --resolution 16 --out " +
                              dir.file("pts.binvox"));
  ASSERT_EQ(r.code, 0) << r.err;
  const BinaryGrid grid = load_binvox(dir.file("pts.binvox"));
  EXPECT_GT(grid.count(), 50u);
}

TEST(Cli, VoxelizeRequiresExactlyOneSource) {
  tt::TempDir dir;
  save_mesh(tt::box_mesh(0.1, 0.1, 0.1), dir.file("box.off"));
  const RunResult both =
      run_cli("voxelize --mesh " + dir.file("box.off") + " --cloud " +
              dir.file("box.off") + " --out " + dir.file("o.binvox"));
  EXPECT_EQ(both.code, 2);
  EXPECT_NE(both.err.find("[validation]"), std::string::npos);
  const RunResult neither = run_cli("voxelize --out " + dir.file("o.binvox"));
  EXPECT_EQ(neither.code, 2);
}

TEST(Cli, CompleteTwoViewsFusesAndMeshes) {
  tt::TempDir dir;
  save_mesh(tt::uv_sphere(0.05, 12, 16), dir.file("orb.off"));
  const Vec3 p1(0.5, 0.1, 0.05), p2 = -p1;
  ASSERT_EQ(run_cli("render --mesh " + dir.file("orb.off") + " --pos " +
                    v3(p1) + " --look-at 0 0 0 --width 96 --height 72" +
                    " --out " + dir.file("v1"))
                .code,
            0);
  ASSERT_EQ(run_cli("render --mesh " + dir.file("orb.off") + " --pos " +
                    v3(p2) + " --look-at 0 0 0 --width 96 --height 72" +
                    " --out " + dir.file("v2"))
                .code,
            0);

  const RunResult r = run_cli(
      "complete --depth " + dir.file("v1") + " --depth2 " + dir.file("v2") +
      " --resolution 24 --out-grid " + dir.file("fused.sgrid") +
      " --out-mesh " + dir.file("fused.off"));
  ASSERT_EQ(r.code, 0) << r.err;

  const ScoreGrid grid = load_score_grid(dir.file("fused.sgrid"));
  EXPECT_EQ(grid.spec.resolution, 24);
  const std::size_t occupied = threshold_grid(grid, 0.5).count();
  EXPECT_GT(occupied, 100u);

  const TriangleMesh fused = load_mesh(dir.file("fused.off"));
  EXPECT_GT(fused.faces.size(), 100u);
  // World frame: the reconstructed sphere surface stays near the origin.
  EXPECT_LT(mesh_vertex_centroid(fused).norm(), 0.05);

  // A deterministic registration perturbation changes the fused grid.
  const RunResult noisy = run_cli(
      "complete --depth " + dir.file("v1") + " --depth2 " + dir.file("v2") +
      " --resolution 24 --noise-fraction 0.05 --seed 11 --out-grid " +
      dir.file("noisy.sgrid"));
  ASSERT_EQ(noisy.code, 0) << noisy.err;
  EXPECT_NE(slurp(dir.file("noisy.sgrid")), slurp(dir.file("fused.sgrid")));
}

TEST(Cli, NbvEmitsSolutionJson) {
  tt::TempDir dir;
  save_mesh(tt::uv_sphere(0.05, 12, 16), dir.file("orb.off"));
  ASSERT_EQ(run_cli("render --mesh " + dir.file("orb.off") +
                    " --pos 0.5 0.1 0.05 --look-at 0 0 0 --width 96" +
                    " --height 72 --out " + dir.file("v1"))
                .code,
            0);
  ASSERT_EQ(run_cli("complete --depth " + dir.file("v1") +
                    " --resolution 24 --out-grid " + dir.file("one.sgrid"))
                .code,
            0);

  const RunResult r =
      run_cli("nbv --grid " + dir.file("one.sgrid") +
              " --view-dir 0 0 1 --out " + dir.file("sol.json"));
  ASSERT_EQ(r.code, 0) << r.err;

  std::ifstream f(dir.file("sol.json"));
  ASSERT_TRUE(f.good());
  Json j;
  f >> j;
  const Vec3 v = vec3_from_json(j.at("v_nbv"), "v_nbv");
  EXPECT_NEAR(v.norm(), 1.0, 1e-9);
  EXPECT_TRUE(j.contains("target_position"));
  EXPECT_TRUE(j.contains("theta_head_rad"));
  EXPECT_TRUE(j.contains("h_torso"));
  EXPECT_TRUE(j.contains("vertical_fallback"));
  // stdout carries the same document.
  EXPECT_EQ(Json::parse(r.out), j);
}

TEST(Cli, NbvWithoutUncertaintyExitsDegenerate) {
  tt::TempDir dir;
  GridSpec spec;
  spec.resolution = 8;
  spec.voxel_size = 0.01;
  save_score_grid(ScoreGrid(spec, 1.0f), dir.file("sure.sgrid"));
  const RunResult r =
      run_cli("nbv --grid " + dir.file("sure.sgrid") + " --view-dir 0 0 1");
  EXPECT_EQ(r.code, 5);
  EXPECT_NE(r.err.find("[degenerate]"), std::string::npos);
}

TEST(Cli, EvaluateRunsTinySuite) {
  tt::TempDir meshes;
  save_mesh(tt::uv_sphere(0.05, 10, 14), meshes.file("orb.off"));
  save_mesh(tt::box_mesh(0.07, 0.08, 0.1), meshes.file("brick.off"));

  HarnessConfig cfg;
  cfg.mesh_dir = meshes.path();
  cfg.poses_per_mesh = 1;
  cfg.scenarios = {"single", "opposite"};
  cfg.camera_width = 96;
  cfg.camera_height = 72;
  cfg.resolution = 20;
  cfg.hausdorff_samples = 300;

  tt::TempDir dir;
  {
    std::ofstream f(dir.file("config.json"));
    f << to_json(cfg).dump(2) << '\n';
  }
  const RunResult r =
      run_cli("evaluate --config " + dir.file("config.json") +
              " --out-dir " + dir.file("reports") + " --jobs 2");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("scenario"), std::string::npos);
  EXPECT_NE(r.out.find("reports:"), std::string::npos);

  std::ifstream csv(dir.file("reports/trials.csv"));
  ASSERT_TRUE(csv.good());
  int lines = 0;
  for (std::string line; std::getline(csv, line);) lines += !line.empty();
  EXPECT_EQ(lines, 1 + 2 * 2);

  Json agg;
  std::ifstream(dir.file("reports/aggregates.json")) >> agg;
  EXPECT_EQ(agg["trial_count"], 4);

  // --seed overrides master_seed in the echoed config.
  const RunResult reseeded =
      run_cli("evaluate --config " + dir.file("config.json") +
              " --out-dir " + dir.file("reports2") + " --seed 9");
  ASSERT_EQ(reseeded.code, 0) << reseeded.err;
  Json agg2;
  std::ifstream(dir.file("reports2/aggregates.json")) >> agg2;
  EXPECT_EQ(agg2["config"]["master_seed"], 9);
  EXPECT_NE(agg2["scenarios"], agg["scenarios"]);
}

TEST(Cli, ErrorExitCodes) {
  tt::TempDir dir;

  // Invalid config values -> validation (2).
  {
    std::ofstream f(dir.file("bad.json"));
    f << "{\"jobs\": 0, \"mesh_dir\": \"x\"}\n";
  }
  const RunResult invalid = run_cli("evaluate --config " + dir.file("bad.json") +
                                    " --out-dir " + dir.file("out"));
  EXPECT_EQ(invalid.code, 2);
  EXPECT_NE(invalid.err.find("jobs"), std::string::npos);

  // Unparseable mesh -> parse (3).
  {
    std::ofstream f(dir.file("garbage.off"));
    f << "not a mesh\n";
  }
  const RunResult parse =
      run_cli("render --mesh " + dir.file("garbage.off") +
              " --out " + dir.file("d"));
  EXPECT_EQ(parse.code, 3);
  EXPECT_NE(parse.err.find("[parse]"), std::string::npos);

  // Missing file -> io (4).
  const RunResult missing = run_cli("render --mesh " + dir.file("no.off") +
                                    " --out " + dir.file("d"));
  EXPECT_EQ(missing.code, 4);
  EXPECT_NE(missing.err.find("[io]"), std::string::npos);
}
