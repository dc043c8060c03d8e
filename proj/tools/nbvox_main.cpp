// nbvox command line tool: depth rendering, voxelization, shape completion,
// next-best-view planning and full evaluation runs over the library.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nbvox/nbvox.hpp"

namespace {

using namespace nbvox;

Vec3 to_vec3(const std::vector<double>& v) { return Vec3(v[0], v[1], v[2]); }

ScoreGrid observed_object_grid(const PointCloud& cloud, int resolution,
                               double pad) {
  const GridSpec spec = fit_spec(cloud, resolution, pad);
  const BinaryGrid occ = voxelize_cloud(cloud, spec);
  ScoreGrid grid(spec, 0.5f);
  for (std::size_t i = 0; i < occ.occupied.size(); ++i)
    if (occ.occupied[i]) grid.scores[i] = 1.0f;
  return grid;
}

ViewFrame frame_from_depth(const std::string& path, const std::string& key,
                           int resolution, double pad) {
  ViewFrame frame;
  frame.key = key;
  frame.depth = load_depth(path);
  frame.camera = frame.depth.camera;
  const PointCloud cloud = depth_to_cloud(frame.depth);
  frame.grid = observed_object_grid(cloud, resolution, pad);
  return frame;
}

int cmd_render(const std::string& mesh_path, const std::vector<double>& pos,
               const std::vector<double>& look, int width, int height,
               double fov, double max_range, bool panorama, double pitch_deg,
               const std::string& out, bool png, const std::string& cloud_out) {
  const TriangleMesh mesh = load_mesh(mesh_path);
  const Bvh bvh(mesh);
  CameraModel cam;
  cam.width = width;
  cam.height = height;
  cam.vertical_fov_deg = fov;
  cam.max_range = max_range;

  std::vector<DepthImage> images;
  std::vector<std::string> paths;
  if (panorama) {
    images = capture_panorama(bvh, to_vec3(pos), cam,
                              pitch_deg * std::numbers::pi / 180.0);
    for (int k = 0; k < 8; ++k) {
      char suffix[16];
      std::snprintf(suffix, sizeof(suffix), "_%03d", k * 45);
      paths.push_back(out + suffix);
    }
  } else {
    cam.pose = look_at(to_vec3(pos), to_vec3(look));
    images.push_back(render_depth(bvh, cam));
    paths.push_back(out);
  }

  PointCloud merged;
  for (std::size_t i = 0; i < images.size(); ++i) {
    save_depth(images[i], paths[i]);
    if (png) save_depth_png16(images[i], paths[i] + ".png");
    if (!cloud_out.empty()) {
      const PointCloud world = depth_to_world_cloud(images[i]);
      merged.points.insert(merged.points.end(), world.points.begin(),
                           world.points.end());
    }
    std::cout << paths[i] << ": " << depth_to_cloud(images[i]).size()
              << " valid pixels\n";
  }
  if (!cloud_out.empty()) save_cloud_xyz(merged, cloud_out);
  return 0;
}

int cmd_voxelize(const std::string& mesh_path, const std::string& cloud_path,
                 int resolution, double pad, const std::string& out) {
  BinaryGrid grid;
  if (!mesh_path.empty()) {
    const TriangleMesh mesh = load_mesh(mesh_path);
    PointCloud vertices;
    vertices.points = mesh.vertices;
    grid = solid_voxelize(mesh, fit_spec(vertices, resolution, pad));
  } else {
    const PointCloud cloud = load_cloud_xyz(cloud_path);
    grid = voxelize_cloud(cloud, fit_spec(cloud, resolution, pad));
  }
  save_binvox(grid, out);
  std::cout << out << ": " << grid.count() << " of "
            << grid.spec.cell_count() << " cells occupied\n";
  return 0;
}

int cmd_complete(const std::string& depth_path, const std::string& depth2_path,
                 const std::string& completer_name,
                 const std::string& completer_dir, const std::string& key,
                 int resolution, double pad, double v_boundary,
                 double noise_fraction, int noise_steps, std::uint64_t seed,
                 const std::string& out_grid, const std::string& out_mesh) {
  const ViewFrame frame =
      frame_from_depth(depth_path, key, resolution, pad);

  std::unique_ptr<Completer> completer;
  if (completer_name == "file")
    completer = std::make_unique<FileCompleter>(completer_dir);
  else if (completer_name == "shadow")
    completer = std::make_unique<ShadowCompleter>();
  else
    throw ValidationError("unknown completer '" + completer_name + "'");

  const ScoreGrid prediction = completer->complete(frame);
  LabelGrid evidence = carve_frame(frame);

  if (!depth2_path.empty()) {
    const ViewFrame frame2 =
        frame_from_depth(depth2_path, key + "_v2", resolution, pad);
    RigidTransform registration =
        frame.camera.pose.inverse() * frame2.camera.pose;
    if (noise_fraction > 0.0)
      registration = perturb_registration(
          registration, OdometryNoiseParams{noise_fraction, noise_steps,
                                            seed});
    evidence = merge_grids(
        evidence, carve_frame_into(frame2, frame.grid.spec, registration));
  }

  const ScoreGrid final_scores = apply_carving(prediction, evidence);
  save_score_grid(final_scores, out_grid);
  std::cout << out_grid << ": "
            << threshold_grid(final_scores, v_boundary).count()
            << " cells at or above the boundary\n";

  if (!out_mesh.empty()) {
    // The grid lives in the first camera's frame; publish the mesh in world.
    const TriangleMesh surface = transform_mesh(
        marching_cubes(final_scores, v_boundary), frame.camera.pose);
    save_mesh(surface, out_mesh);
    std::cout << out_mesh << ": " << surface.faces.size() << " triangles\n";
  }
  return 0;
}

int cmd_nbv(const std::string& grid_path, const std::string& camera_path,
            const std::vector<double>& view_dir, double epsilon,
            double v_boundary, double d_optimal, double base_height,
            double torso_min, double torso_max, const std::string& out) {
  const ScoreGrid grid = load_score_grid(grid_path);
  const UncertainSet uncertain = uncertain_voxels(grid, epsilon, v_boundary);

  // Object centroid estimate: mean center of at-or-above-boundary cells.
  const BinaryGrid hull = threshold_grid(grid, v_boundary);
  Vec3 centroid = Vec3::Zero();
  std::size_t n = 0;
  for (int x = 0; x < grid.spec.resolution; ++x)
    for (int y = 0; y < grid.spec.resolution; ++y)
      for (int z = 0; z < grid.spec.resolution; ++z)
        if (hull.get(Vec3i(x, y, z))) {
          centroid += grid.spec.cell_center(Vec3i(x, y, z));
          ++n;
        }
  if (n == 0)
    throw DegenerateInputError("no occupied cells to aim at in " + grid_path);
  centroid /= static_cast<double>(n);

  RobotGeometry robot{base_height, torso_min, torso_max};

  Vec3 v_grid;
  Vec3 current_camera = Vec3::Zero();
  NbvSolution solution;
  if (!camera_path.empty()) {
    std::ifstream in(camera_path);
    if (!in) throw IoError("cannot open camera file: " + camera_path);
    Json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(camera_path + ": " + e.what());
    }
    const CameraModel cam = camera_from_json(j, camera_path);
    // Grid is in this camera's frame: plan there, then report in world.
    v_grid = next_best_view(uncertain, Vec3::UnitZ());
    const Vec3 v_world = cam.pose.rotate(v_grid);
    const Vec3 centroid_world = cam.pose.apply(centroid);
    solution = target_pose(v_world, centroid_world, robot, d_optimal,
                           cam.position());
  } else {
    v_grid = next_best_view(uncertain, to_vec3(view_dir));
    solution = target_pose(v_grid, centroid, robot, d_optimal,
                           current_camera);
  }

  const Json j = to_json(solution);
  if (!out.empty()) {
    std::ofstream f(out);
    if (!f) throw IoError("cannot open for writing: " + out);
    f << j.dump(2) << '\n';
  }
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_evaluate(const std::string& config_path, const std::string& out_dir,
                 std::optional<std::uint64_t> seed, std::optional<int> jobs) {
  HarnessConfig cfg = load_config(config_path);
  if (seed) cfg.master_seed = *seed;
  if (jobs) cfg.jobs = *jobs;
  const SuiteResult suite = run_suite(cfg, out_dir);

  std::cout << "scenario        trials     ok  mean_jaccard  mean_hd_mm\n";
  for (const auto& [name, st] : suite.stats) {
    char line[128];
    if (st.ok > 0)
      std::snprintf(line, sizeof(line), "%-14s %7d %6d %13.4f %11.2f\n",
                    name.c_str(), st.trials, st.ok, st.mean_jaccard,
                    st.mean_hausdorff_mm);
    else
      std::snprintf(line, sizeof(line), "%-14s %7d %6d %13s %11s\n",
                    name.c_str(), st.trials, st.ok, "-", "-");
    std::cout << line;
  }
  std::cout << "reports: " << out_dir << "/trials.csv, aggregates.json, "
            << "run_info.json\n";
  return 0;
}

int exit_code_for(const Error& e) {
  const std::string& c = e.category();
  if (c == "validation") return 2;
  if (c == "parse") return 3;
  if (c == "io") return 4;
  if (c == "degenerate") return 5;
  if (c == "no_plane") return 6;
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"geometric view planning, volumetric fusion and evaluation"};
  app.require_subcommand(1);

  // render
  std::string r_mesh, r_out, r_cloud;
  std::vector<double> r_pos{1.0, 0.0, 1.0}, r_look{0.0, 0.0, 0.0};
  int r_width = 320, r_height = 240;
  double r_fov = 60.0, r_range = 4.0, r_pitch = 0.0;
  bool r_pano = false, r_png = false;
  auto* render = app.add_subcommand("render", "raycast depth images");
  render->add_option("--mesh", r_mesh, "scene mesh (.off/.obj/.stl)")
      ->required();
  render->add_option("--pos", r_pos, "camera position")->expected(3);
  render->add_option("--look-at", r_look, "aim point")->expected(3);
  render->add_option("--width", r_width, "image width");
  render->add_option("--height", r_height, "image height");
  render->add_option("--fov", r_fov, "vertical field of view, degrees");
  render->add_option("--max-range", r_range, "depth cutoff, meters");
  render->add_flag("--panorama", r_pano,
                   "8 captures at 45 degree yaw steps from --pos");
  render->add_option("--pitch-deg", r_pitch, "panorama pitch, degrees");
  render->add_option("--out", r_out, "output depth base path")->required();
  render->add_flag("--png", r_png, "also write 16-bit millimeter PNGs");
  render->add_option("--cloud", r_cloud, "write merged world-frame .xyz");

  // voxelize
  std::string v_mesh, v_cloud, v_out;
  int v_res = 40;
  double v_pad = 0.05;
  auto* voxelize =
      app.add_subcommand("voxelize", "mesh or cloud to a binvox grid");
  voxelize->add_option("--mesh", v_mesh, "watertight mesh, filled solid");
  voxelize->add_option("--cloud", v_cloud, ".xyz cloud, surface cells only");
  voxelize->add_option("--resolution", v_res, "cells per axis");
  voxelize->add_option("--pad", v_pad, "bounding cube padding fraction");
  voxelize->add_option("--out", v_out, "output .binvox")->required();

  // complete
  std::string c_depth, c_depth2, c_completer = "shadow", c_dir, c_key = "view";
  std::string c_out_grid, c_out_mesh;
  int c_res = 40, c_noise_steps = 8;
  double c_pad = 0.05, c_boundary = 0.5, c_noise = 0.0;
  std::uint64_t c_seed = 0;
  auto* complete =
      app.add_subcommand("complete", "carve and complete captured depth");
  complete->add_option("--depth", c_depth, "primary depth base path")
      ->required();
  complete->add_option("--depth2", c_depth2,
                       "secondary depth base path to fuse");
  complete->add_option("--completer", c_completer, "shadow or file");
  complete->add_option("--completer-dir", c_dir,
                       "directory of <key>.sgrid files");
  complete->add_option("--key", c_key, "frame key for the file completer");
  complete->add_option("--resolution", c_res, "cells per axis");
  complete->add_option("--pad", c_pad, "bounding cube padding fraction");
  complete->add_option("--v-boundary", c_boundary, "occupancy boundary");
  complete->add_option("--noise-fraction", c_noise,
                       "odometry noise on the two-view registration");
  complete->add_option("--noise-steps", c_noise_steps,
                       "odometry decomposition steps");
  complete->add_option("--seed", c_seed, "noise seed");
  complete->add_option("--out-grid", c_out_grid, "output .sgrid")->required();
  complete->add_option("--out-mesh", c_out_mesh,
                       "optional world-frame isosurface mesh");

  // nbv
  std::string n_grid, n_camera, n_out;
  std::vector<double> n_view{0.0, 0.0, 1.0};
  double n_eps = 0.025, n_boundary = 0.5, n_d = 0.6;
  double n_base = 1.0, n_tmin = 0.0, n_tmax = 0.4;
  auto* nbv = app.add_subcommand("nbv", "plan the next view from a grid");
  nbv->add_option("--grid", n_grid, "input .sgrid")->required();
  nbv->add_option("--camera", n_camera,
                  "camera JSON; plan in its frame, report in world");
  nbv->add_option("--view-dir", n_view, "current view direction, grid frame")
      ->expected(3);
  nbv->add_option("--epsilon", n_eps, "uncertainty band half-width");
  nbv->add_option("--v-boundary", n_boundary, "occupancy boundary");
  nbv->add_option("--d-optimal", n_d, "standoff distance, meters");
  nbv->add_option("--base-height", n_base, "sensor height at zero lift");
  nbv->add_option("--torso-min", n_tmin, "torso lift minimum");
  nbv->add_option("--torso-max", n_tmax, "torso lift maximum");
  nbv->add_option("--out", n_out, "write the solution JSON here too");

  // evaluate
  std::string e_config, e_out;
  std::optional<std::uint64_t> e_seed;
  std::optional<int> e_jobs;
  auto* evaluate =
      app.add_subcommand("evaluate", "run the full evaluation suite");
  evaluate->add_option("--config", e_config, "harness config JSON")
      ->required();
  evaluate->add_option("--out-dir", e_out, "report directory")->required();
  evaluate->add_option("--seed", e_seed, "override master_seed");
  evaluate->add_option("--jobs", e_jobs, "override worker count");

  CLI11_PARSE(app, argc, argv);

  try {
    if (render->parsed())
      return cmd_render(r_mesh, r_pos, r_look, r_width, r_height, r_fov,
                        r_range, r_pano, r_pitch, r_out, r_png, r_cloud);
    if (voxelize->parsed()) {
      if (v_mesh.empty() == v_cloud.empty())
        throw ValidationError("pass exactly one of --mesh and --cloud");
      return cmd_voxelize(v_mesh, v_cloud, v_res, v_pad, v_out);
    }
    if (complete->parsed())
      return cmd_complete(c_depth, c_depth2, c_completer, c_dir, c_key,
                          c_res, c_pad, c_boundary, c_noise, c_noise_steps,
                          c_seed, c_out_grid, c_out_mesh);
    if (nbv->parsed())
      return cmd_nbv(n_grid, n_camera, n_view, n_eps, n_boundary, n_d,
                     n_base, n_tmin, n_tmax, n_out);
    if (evaluate->parsed()) return cmd_evaluate(e_config, e_out, e_seed,
                                                e_jobs);
  } catch (const nbvox::Error& e) {
    std::cerr << "nbvox: error [" << e.category() << "]: " << e.what()
              << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "nbvox: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
