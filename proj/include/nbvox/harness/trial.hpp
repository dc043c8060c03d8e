#pragma once

// One evaluation trial: stage a tabletop scene, capture a first view from a
// seeded sphere point, segment the object off its supporting surface, carve
// and complete its voxel grid, optionally plan and fuse a second view, then
// score the reconstruction against ground truth (voxel Jaccard and predicted
// surface-to-truth Hausdorff).
//
// Everything derived from the first view is scenario-independent by
// construction (its seeds ignore the scenario), so the second-view policies
// are compared pairwise on identical starting observations.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "nbvox/completion/completer.hpp"
#include "nbvox/completion/marching_cubes.hpp"
#include "nbvox/core/bvh.hpp"
#include "nbvox/core/geometry.hpp"
#include "nbvox/core/rng.hpp"
#include "nbvox/harness/config.hpp"
#include "nbvox/harness/scene.hpp"
#include "nbvox/metrics/metrics.hpp"
#include "nbvox/nbv/nbv.hpp"
#include "nbvox/noise/odometry.hpp"
#include "nbvox/segmentation/segmentation.hpp"
#include "nbvox/views/render.hpp"
#include "nbvox/voxel/solid.hpp"

namespace nbvox {

enum class Scenario { kSingle, kRandom, kOpposite, kNbv };

inline Scenario scenario_from_string(const std::string& name) {
  if (name == "single") return Scenario::kSingle;
  if (name == "random") return Scenario::kRandom;
  if (name == "opposite") return Scenario::kOpposite;
  if (name == "nbv") return Scenario::kNbv;
  throw ValidationError("unknown scenario '" + name + "'");
}

inline std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::kSingle: return "single";
    case Scenario::kRandom: return "random";
    case Scenario::kOpposite: return "opposite";
    case Scenario::kNbv: return "nbv";
  }
  return "single";
}

struct TrialResult {
  std::string mesh;
  int pose = 0;
  std::string scenario;
  std::string status = "ok";  // "ok" or a failure category
  std::string detail;
  double jaccard = std::numeric_limits<double>::quiet_NaN();
  double hausdorff_mm = std::numeric_limits<double>::quiet_NaN();
  bool has_v_nbv = false;
  Vec3 v_nbv = Vec3::Zero();
  bool used_fallback = false;
  std::uint64_t seed = 0;
  double wall_ms = 0.0;  // filled by the runner, not serialized
};

namespace seed_purpose {
constexpr std::uint64_t kPose = 1;
constexpr std::uint64_t kTable = 2;
constexpr std::uint64_t kFirstView = 3;
constexpr std::uint64_t kSecondView = 4;
constexpr std::uint64_t kRansac = 5;
constexpr std::uint64_t kNoise = 6;
constexpr std::uint64_t kMetrics = 7;
}  // namespace seed_purpose

struct StagedScene {
  std::string mesh_name;
  int mesh_index = 0;
  int pose_index = 0;
  // Heap-owned so the BVH's reference into scene->combined survives moves
  // of the StagedScene itself.
  std::unique_ptr<Scene> scene;
  std::unique_ptr<Bvh> bvh;
  Vec3 focus = Vec3::Zero();  // ground-truth object centroid, world
};

inline StagedScene stage_scene(const TriangleMesh& object,
                               const std::string& mesh_name, int mesh_index,
                               int pose_index, const HarnessConfig& cfg) {
  StagedScene staged;
  staged.mesh_name = mesh_name;
  staged.mesh_index = mesh_index;
  staged.pose_index = pose_index;
  const std::uint64_t mi = static_cast<std::uint64_t>(mesh_index);
  const std::uint64_t pi = static_cast<std::uint64_t>(pose_index);
  const double table =
      cfg.table_heights[mix_seed(cfg.master_seed, mi, pi, seed_purpose::kTable) %
                        cfg.table_heights.size()];
  staged.scene = std::make_unique<Scene>(synthesize_scene(
      object, table, cfg.pedestal_half_extent, cfg.pedestal_thickness,
      mix_seed(cfg.master_seed, mi, pi, seed_purpose::kPose)));
  staged.bvh = std::make_unique<Bvh>(staged.scene->combined);
  staged.focus = mesh_vertex_centroid(staged.scene->object_world);
  return staged;
}

/// Camera on the sphere of radius d_optimal centered on `focus`, at the
/// given azimuth/elevation, with the height squeezed into what the robot's
/// torso can reach (the camera stays on the sphere; the elevation gives).
inline CameraModel place_sphere_camera(const Vec3& focus, double azimuth,
                                       double elevation,
                                       const HarnessConfig& cfg) {
  const double z_lo = cfg.robot.camera_base_height + cfg.robot.torso_min;
  const double z_hi = cfg.robot.camera_base_height + cfg.robot.torso_max;
  double z = focus.z() + cfg.d_optimal * std::sin(elevation);
  z = std::clamp(z, z_lo, z_hi);
  const double s = std::clamp((z - focus.z()) / cfg.d_optimal, -0.999, 0.999);
  const double el = std::asin(s);
  const Vec3 pos = focus + cfg.d_optimal * Vec3(std::cos(el) *
                                                    std::cos(azimuth),
                                                std::cos(el) *
                                                    std::sin(azimuth),
                                                std::sin(el));
  CameraModel cam = cfg.camera_model();
  cam.pose = look_at(pos, focus);
  return cam;
}

inline CameraModel sample_sphere_camera(const Vec3& focus,
                                        const HarnessConfig& cfg,
                                        std::uint64_t seed) {
  Rng rng(seed);
  const double az = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double el = rng.uniform(cfg.elevation_min_deg * std::numbers::pi /
                                    180.0,
                                cfg.elevation_max_deg * std::numbers::pi /
                                    180.0);
  return place_sphere_camera(focus, az, el, cfg);
}

/// Everything a trial derives from the first capture alone. Shared across
/// scenarios of the same (mesh, pose).
struct FirstView {
  bool ok = false;
  std::string status;  // failure category when !ok
  std::string detail;

  CameraModel camera;
  DepthImage depth;
  Vec3 robot_origin = Vec3::Zero();  // world origin of the segmentation frame
  Plane plane;                        // supporting surface, robot frame
  Vec3 centroid_world = Vec3::Zero();  // estimated object centroid
  ViewFrame frame;
  ScoreGrid prediction;  // completer output for the first view
  LabelGrid labels;      // observed evidence from the first view
  TriangleMesh gt_mesh;  // ground truth in the first camera's frame
  BinaryGrid gt_grid;    // ground truth voxelized into the frame's spec
};

namespace detail {

inline std::vector<std::uint8_t> object_mask(const DepthImage& image,
                                             const Plane& plane_robot,
                                             const Vec3& robot_origin,
                                             double margin) {
  const CameraModel& cam = image.camera;
  std::vector<std::uint8_t> mask(image.depth.size(), 0);
  for (int y = 0; y < cam.height; ++y) {
    for (int x = 0; x < cam.width; ++x) {
      const float d = image.at(x, y);
      if (d <= 0.0f) continue;
      const Vec3 p_world =
          cam.pose.apply(static_cast<double>(d) * cam.pixel_dir(x, y));
      const Vec3 p_robot = p_world - robot_origin;
      if (plane_robot.signed_distance(p_robot) > margin)
        mask[static_cast<std::size_t>(y) * static_cast<std::size_t>(cam.width) +
             static_cast<std::size_t>(x)] = 1;
    }
  }
  return mask;
}

/// Observed-surface occupancy as scores: 1 where a point landed, 0.5
/// (unobserved) elsewhere.
inline ScoreGrid observed_grid(const PointCloud& cloud, const GridSpec& spec) {
  const BinaryGrid occ = voxelize_cloud(cloud, spec);
  ScoreGrid grid(spec, 0.5f);
  for (std::size_t i = 0; i < occ.occupied.size(); ++i)
    if (occ.occupied[i]) grid.scores[i] = 1.0f;
  return grid;
}

}  // namespace detail

inline FirstView compute_first_view(const StagedScene& staged,
                                    const HarnessConfig& cfg,
                                    const Completer& completer) {
  const std::uint64_t mi = static_cast<std::uint64_t>(staged.mesh_index);
  const std::uint64_t pi = static_cast<std::uint64_t>(staged.pose_index);
  FirstView fv;
  fv.camera = sample_sphere_camera(
      staged.focus, cfg,
      mix_seed(cfg.master_seed, mi, pi, seed_purpose::kFirstView));
  fv.depth = render_depth(*staged.bvh, fv.camera);

  // Segment in a z-up frame with the origin under the sensor.
  fv.robot_origin =
      Vec3(fv.camera.position().x(), fv.camera.position().y(), 0.0);
  const PointCloud cloud_world = depth_to_world_cloud(fv.depth);
  PointCloud cloud_robot;
  cloud_robot.points.reserve(cloud_world.size());
  for (const Vec3& p : cloud_world.points)
    cloud_robot.points.push_back(p - fv.robot_origin);
  const PointCloud band = band_filter(cloud_robot, cfg.band_near,
                                      cfg.band_far);
  if (band.size() < 3) {
    fv.status = "segmentation_failed";
    fv.detail = "band filter kept " + std::to_string(band.size()) + " points";
    return fv;
  }
  PlaneModel table;
  try {
    table = ransac_plane(
        band, cfg.ransac_params(
                  mix_seed(cfg.master_seed, mi, pi, seed_purpose::kRansac)));
  } catch (const NoPlaneError& e) {
    fv.status = "no_plane";
    fv.detail = e.what();
    return fv;
  }
  fv.plane = table.plane;
  const PointCloud object_robot =
      extract_above_plane(band, table.plane, cfg.above_margin);
  if (object_robot.size() < static_cast<std::size_t>(cfg.min_object_points)) {
    fv.status = "segmentation_failed";
    fv.detail = "only " + std::to_string(object_robot.size()) +
                " points above the surface";
    return fv;
  }

  PointCloud object_world;
  object_world.points.reserve(object_robot.size());
  for (const Vec3& p : object_robot.points)
    object_world.points.push_back(p + fv.robot_origin);
  fv.centroid_world = cloud_centroid(object_world);

  const RigidTransform world_to_cam = fv.camera.pose.inverse();
  const PointCloud object_cam = transform_cloud(object_world, world_to_cam);
  GridSpec spec;
  try {
    spec = fit_spec(object_cam, cfg.resolution, cfg.pad_fraction);
  } catch (const DegenerateInputError& e) {
    fv.status = "segmentation_failed";
    fv.detail = e.what();
    return fv;
  }

  fv.frame.key = staged.mesh_name + "_p" + std::to_string(staged.pose_index);
  fv.frame.camera = fv.camera;
  fv.frame.depth = fv.depth;
  fv.frame.mask = detail::object_mask(fv.depth, fv.plane, fv.robot_origin,
                                      cfg.above_margin);
  fv.frame.grid = detail::observed_grid(object_cam, spec);

  fv.prediction = completer.complete(fv.frame);
  fv.labels = carve_frame(fv.frame);

  fv.gt_mesh = transform_mesh(staged.scene->object_world, world_to_cam);
  fv.gt_grid = solid_voxelize(fv.gt_mesh, spec);
  fv.ok = true;
  return fv;
}

/// Second-view pose per scenario. Returns the camera and, for nbv, the
/// direction and whether the antipodal fallback kicked in.
struct SecondViewPlan {
  CameraModel camera;
  bool has_v_nbv = false;
  Vec3 v_nbv = Vec3::Zero();
  bool used_fallback = false;
};

inline SecondViewPlan plan_second_view(Scenario scenario,
                                       const StagedScene& staged,
                                       const FirstView& fv,
                                       const HarnessConfig& cfg) {
  const std::uint64_t mi = static_cast<std::uint64_t>(staged.mesh_index);
  const std::uint64_t pi = static_cast<std::uint64_t>(staged.pose_index);
  SecondViewPlan plan;
  switch (scenario) {
    case Scenario::kSingle:
      throw ValidationError("single scenario has no second view");
    case Scenario::kRandom: {
      plan.camera = sample_sphere_camera(
          fv.centroid_world, cfg,
          mix_seed(cfg.master_seed, mi, pi, seed_purpose::kSecondView));
      return plan;
    }
    case Scenario::kOpposite: {
      // Exact antipode of the first camera through its aim point, so the
      // two optical axes are antiparallel.
      const Vec3 pos = 2.0 * staged.focus - fv.camera.position();
      plan.camera = cfg.camera_model();
      plan.camera.pose = look_at(pos, staged.focus);
      return plan;
    }
    case Scenario::kNbv: {
      try {
        const UncertainSet uncertain =
            uncertain_voxels(fv.prediction, cfg.epsilon, cfg.v_boundary);
        const Vec3 v_grid = next_best_view(uncertain, Vec3::UnitZ());
        plan.v_nbv = fv.camera.pose.rotate(v_grid);
        plan.has_v_nbv = true;
        const NbvSolution sol =
            target_pose(plan.v_nbv, fv.centroid_world, cfg.robot,
                        cfg.d_optimal, fv.camera.position());
        plan.camera = cfg.camera_model();
        plan.camera.pose =
            look_at(sol.camera_position(cfg.robot), fv.centroid_world);
      } catch (const DegenerateInputError&) {
        // No usable uncertainty structure: fall back to the far side of the
        // estimated centroid.
        plan.used_fallback = true;
        const Vec3 pos = 2.0 * fv.centroid_world - fv.camera.position();
        plan.camera = cfg.camera_model();
        plan.camera.pose = look_at(pos, fv.centroid_world);
      }
      return plan;
    }
  }
  throw ValidationError("unreachable scenario");
}

inline TrialResult run_trial(const StagedScene& staged, const FirstView& fv,
                             Scenario scenario, const HarnessConfig& cfg) {
  const std::uint64_t mi = static_cast<std::uint64_t>(staged.mesh_index);
  const std::uint64_t pi = static_cast<std::uint64_t>(staged.pose_index);
  TrialResult result;
  result.mesh = staged.mesh_name;
  result.pose = staged.pose_index;
  result.scenario = to_string(scenario);
  result.seed = mix_seed(cfg.master_seed, mi, pi, 0);

  if (!fv.ok) {
    result.status = fv.status;
    result.detail = fv.detail;
    return result;
  }

  try {
    LabelGrid evidence = fv.labels;
    if (scenario != Scenario::kSingle) {
      const SecondViewPlan plan = plan_second_view(scenario, staged, fv, cfg);
      result.has_v_nbv = plan.has_v_nbv;
      result.v_nbv = plan.v_nbv;
      result.used_fallback = plan.used_fallback;

      ViewFrame frame2;
      frame2.key = fv.frame.key + "_v2";
      frame2.camera = plan.camera;
      frame2.depth = render_depth(*staged.bvh, plan.camera);
      frame2.mask = detail::object_mask(frame2.depth, fv.plane,
                                        fv.robot_origin, cfg.above_margin);

      // The second frame's own grid: fitted to its observed object points
      // when they span a volume, otherwise the primary spec (fusion only
      // reads the depth, mask and camera).
      PointCloud object2_cam;
      for (int y = 0; y < frame2.camera.height; ++y)
        for (int x = 0; x < frame2.camera.width; ++x) {
          const float d = frame2.depth.at(x, y);
          const std::size_t px =
              static_cast<std::size_t>(y) *
                  static_cast<std::size_t>(frame2.camera.width) +
              static_cast<std::size_t>(x);
          if (d > 0.0f && frame2.mask[px])
            object2_cam.points.push_back(static_cast<double>(d) *
                                         frame2.camera.pixel_dir(x, y));
        }
      try {
        frame2.grid = detail::observed_grid(
            object2_cam, fit_spec(object2_cam, cfg.resolution,
                                  cfg.pad_fraction));
      } catch (const DegenerateInputError&) {
        frame2.grid = ScoreGrid(fv.frame.grid.spec, 0.5f);
      }

      RigidTransform registration =
          fv.camera.pose.inverse() * plan.camera.pose;
      if (cfg.noisy_registration) {
        OdometryNoiseParams noise = cfg.noise;
        noise.seed = mix_seed(cfg.master_seed, mi, pi, seed_purpose::kNoise);
        registration = perturb_registration(registration, noise);
      }
      evidence = merge_grids(
          evidence,
          carve_frame_into(frame2, fv.frame.grid.spec, registration));
    }

    const ScoreGrid final_scores = apply_carving(fv.prediction, evidence);
    const BinaryGrid hull = threshold_grid(final_scores, cfg.v_boundary);
    result.jaccard = jaccard(hull, fv.gt_grid);

    const TriangleMesh predicted = marching_cubes(final_scores,
                                                  cfg.v_boundary);
    if (predicted.empty()) {
      result.status = "empty_prediction";
      result.detail = "no isosurface at the decision boundary";
      return result;
    }
    result.hausdorff_mm =
        1000.0 * hausdorff_one_direction(
                     predicted, fv.gt_mesh, cfg.hausdorff_samples,
                     mix_seed(cfg.master_seed, mi, pi, seed_purpose::kMetrics));
  } catch (const Error& e) {
    result.status = e.category();
    result.detail = e.what();
  }
  return result;
}

}  // namespace nbvox
