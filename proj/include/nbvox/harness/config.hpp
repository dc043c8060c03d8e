#pragma once

// Evaluation harness configuration: JSON in, validated struct out, and a
// deterministic echo of the effective values for report provenance.
// Validation collects every problem before failing so a bad config reports
// all offending keys at once; unknown keys are errors (they are usually
// typos of real ones).

#include <cstdint>
#include <fstream>
#include <set>
#include <string>
#include <type_traits>
#include <vector>

#include "nbvox/core/error.hpp"
#include "nbvox/core/json.hpp"
#include "nbvox/nbv/nbv.hpp"
#include "nbvox/noise/odometry.hpp"
#include "nbvox/segmentation/segmentation.hpp"

namespace nbvox {

struct HarnessConfig {
  std::uint64_t master_seed = 1;
  int jobs = 1;

  // Dataset: either an explicit mesh list or a directory scanned for
  // .off/.obj/.stl files (sorted by name). Names must be unique.
  std::vector<std::string> mesh_paths;
  std::string mesh_dir;
  int poses_per_mesh = 10;
  std::vector<std::string> scenarios = {"single", "random", "opposite",
                                        "nbv"};
  std::string completer = "shadow";  // "shadow" or "file"
  std::string completer_dir;         // required for "file"

  double grip_width = 0.1;  // smallest object extent after ingest scaling

  // Scene synthesis.
  std::vector<double> table_heights = {0.65, 0.70, 0.75, 0.80};
  double pedestal_half_extent = 0.12;
  double pedestal_thickness = 0.02;

  // Capture.
  int camera_width = 320;
  int camera_height = 240;
  double vertical_fov_deg = 60.0;
  double camera_max_range = 4.0;
  double d_optimal = 0.6;
  double elevation_min_deg = 5.0;
  double elevation_max_deg = 18.0;

  // Segmentation.
  double band_near = 0.3;
  double band_far = 0.7;
  int ransac_iterations = 1000;
  double ransac_distance_threshold = 0.005;
  double ransac_parallel_tolerance_deg = 10.0;
  double above_margin = 0.005;
  int min_object_points = 10;

  // Reconstruction.
  int resolution = 40;
  double pad_fraction = 0.05;
  double v_boundary = 0.5;
  double epsilon = 0.025;

  // Robot reaching the commanded views. The sensor rides lower than the
  // module default so desk-height antipodal views stay reachable.
  RobotGeometry robot{0.6, 0.0, 0.4};

  // Registration corruption (off by default).
  bool noisy_registration = false;
  OdometryNoiseParams noise{0.05, 8, 0};

  int hausdorff_samples = 2000;

  CameraModel camera_model() const {
    CameraModel cam;
    cam.width = camera_width;
    cam.height = camera_height;
    cam.vertical_fov_deg = vertical_fov_deg;
    cam.max_range = camera_max_range;
    return cam;
  }

  RansacParams ransac_params(std::uint64_t seed) const {
    RansacParams p;
    p.iterations = ransac_iterations;
    p.distance_threshold = ransac_distance_threshold;
    p.parallel_tolerance_deg = ransac_parallel_tolerance_deg;
    p.seed = seed;
    return p;
  }

  std::vector<std::string> validate() const {
    std::vector<std::string> errors;
    const auto require = [&](bool ok, const std::string& message) {
      if (!ok) errors.push_back(message);
    };
    require(jobs >= 1, "jobs must be >= 1");
    require(mesh_paths.empty() != mesh_dir.empty(),
            "exactly one of mesh_paths and mesh_dir must be set");
    require(poses_per_mesh >= 1, "poses_per_mesh must be >= 1");
    require(!scenarios.empty(), "scenarios must not be empty");
    for (const std::string& s : scenarios)
      require(s == "single" || s == "random" || s == "opposite" || s == "nbv",
              "unknown scenario '" + s + "'");
    require(completer == "shadow" || completer == "file",
            "completer must be 'shadow' or 'file'");
    require(completer != "file" || !completer_dir.empty(),
            "completer_dir is required for the file completer");
    require(grip_width > 0.0, "grip_width must be positive");
    require(!table_heights.empty(), "table_heights must not be empty");
    for (double h : table_heights)
      require(h > 0.0, "table heights must be positive");
    require(pedestal_half_extent > 0.0,
            "pedestal_half_extent must be positive");
    require(pedestal_thickness > 0.0, "pedestal_thickness must be positive");
    require(camera_width >= 1 && camera_height >= 1,
            "camera resolution must be positive");
    require(vertical_fov_deg > 0.0 && vertical_fov_deg < 180.0,
            "vertical_fov_deg must be in (0, 180)");
    require(camera_max_range > 0.0, "camera_max_range must be positive");
    require(d_optimal > 0.0, "d_optimal must be positive");
    require(elevation_min_deg <= elevation_max_deg,
            "elevation range is inverted");
    require(elevation_min_deg > -90.0 && elevation_max_deg < 90.0,
            "elevation must stay in (-90, 90)");
    require(band_near >= 0.0 && band_far >= band_near,
            "band range requires 0 <= near <= far");
    require(ransac_iterations >= 1, "ransac_iterations must be >= 1");
    require(ransac_distance_threshold > 0.0,
            "ransac_distance_threshold must be positive");
    require(ransac_parallel_tolerance_deg > 0.0 &&
                ransac_parallel_tolerance_deg <= 90.0,
            "ransac_parallel_tolerance_deg must be in (0, 90]");
    require(above_margin >= 0.0, "above_margin must be >= 0");
    require(min_object_points >= 3, "min_object_points must be >= 3");
    require(resolution >= 2, "resolution must be >= 2");
    require(pad_fraction >= 0.0, "pad_fraction must be >= 0");
    require(v_boundary > 0.0 && v_boundary <= 1.0,
            "v_boundary must be in (0, 1]");
    require(epsilon >= 0.0, "epsilon must be >= 0");
    require(robot.camera_base_height > 0.0,
            "robot.camera_base_height must be positive");
    require(robot.torso_max >= robot.torso_min, "robot torso range inverted");
    require(noise.fraction >= 0.0, "noise.fraction must be >= 0");
    require(noise.steps >= 1, "noise.steps must be >= 1");
    require(hausdorff_samples >= 1, "hausdorff_samples must be >= 1");
    return errors;
  }
};

inline Json to_json(const HarnessConfig& c) {
  Json j;
  j["master_seed"] = c.master_seed;
  j["jobs"] = c.jobs;
  j["mesh_paths"] = c.mesh_paths;
  j["mesh_dir"] = c.mesh_dir;
  j["poses_per_mesh"] = c.poses_per_mesh;
  j["scenarios"] = c.scenarios;
  j["completer"] = c.completer;
  j["completer_dir"] = c.completer_dir;
  j["grip_width"] = c.grip_width;
  j["table_heights"] = c.table_heights;
  j["pedestal_half_extent"] = c.pedestal_half_extent;
  j["pedestal_thickness"] = c.pedestal_thickness;
  j["camera_width"] = c.camera_width;
  j["camera_height"] = c.camera_height;
  j["vertical_fov_deg"] = c.vertical_fov_deg;
  j["camera_max_range"] = c.camera_max_range;
  j["d_optimal"] = c.d_optimal;
  j["elevation_min_deg"] = c.elevation_min_deg;
  j["elevation_max_deg"] = c.elevation_max_deg;
  j["band_near"] = c.band_near;
  j["band_far"] = c.band_far;
  j["ransac_iterations"] = c.ransac_iterations;
  j["ransac_distance_threshold"] = c.ransac_distance_threshold;
  j["ransac_parallel_tolerance_deg"] = c.ransac_parallel_tolerance_deg;
  j["above_margin"] = c.above_margin;
  j["min_object_points"] = c.min_object_points;
  j["resolution"] = c.resolution;
  j["pad_fraction"] = c.pad_fraction;
  j["v_boundary"] = c.v_boundary;
  j["epsilon"] = c.epsilon;
  j["robot"] = Json{{"camera_base_height", c.robot.camera_base_height},
                    {"torso_min", c.robot.torso_min},
                    {"torso_max", c.robot.torso_max}};
  j["noisy_registration"] = c.noisy_registration;
  j["noise"] =
      Json{{"fraction", c.noise.fraction}, {"steps", c.noise.steps}};
  j["hausdorff_samples"] = c.hausdorff_samples;
  return j;
}

inline HarnessConfig config_from_json(const Json& j) {
  HarnessConfig c;
  std::vector<std::string> errors;
  std::set<std::string> known;

  const auto get = [&](const char* key, auto& target) {
    known.insert(key);
    if (!j.contains(key)) return;
    const Json& value = j.at(key);
    // nlohmann's arithmetic conversion silently casts booleans and
    // truncates floats; reject those shapes outright so a mistyped value
    // is reported instead of reinterpreted.
    using T = std::decay_t<decltype(target)>;
    bool shape_ok = true;
    if constexpr (std::is_same_v<T, bool>)
      shape_ok = value.is_boolean();
    else if constexpr (std::is_integral_v<T>)
      shape_ok = value.is_number_integer();
    else if constexpr (std::is_floating_point_v<T>)
      shape_ok = value.is_number();
    if (!shape_ok) {
      errors.push_back(std::string(key) + ": wrong type");
      return;
    }
    try {
      value.get_to(target);
    } catch (const nlohmann::json::exception&) {
      errors.push_back(std::string(key) + ": wrong type");
    }
  };

  get("master_seed", c.master_seed);
  get("jobs", c.jobs);
  get("mesh_paths", c.mesh_paths);
  get("mesh_dir", c.mesh_dir);
  get("poses_per_mesh", c.poses_per_mesh);
  get("scenarios", c.scenarios);
  get("completer", c.completer);
  get("completer_dir", c.completer_dir);
  get("grip_width", c.grip_width);
  get("table_heights", c.table_heights);
  get("pedestal_half_extent", c.pedestal_half_extent);
  get("pedestal_thickness", c.pedestal_thickness);
  get("camera_width", c.camera_width);
  get("camera_height", c.camera_height);
  get("vertical_fov_deg", c.vertical_fov_deg);
  get("camera_max_range", c.camera_max_range);
  get("d_optimal", c.d_optimal);
  get("elevation_min_deg", c.elevation_min_deg);
  get("elevation_max_deg", c.elevation_max_deg);
  get("band_near", c.band_near);
  get("band_far", c.band_far);
  get("ransac_iterations", c.ransac_iterations);
  get("ransac_distance_threshold", c.ransac_distance_threshold);
  get("ransac_parallel_tolerance_deg", c.ransac_parallel_tolerance_deg);
  get("above_margin", c.above_margin);
  get("min_object_points", c.min_object_points);
  get("resolution", c.resolution);
  get("pad_fraction", c.pad_fraction);
  get("v_boundary", c.v_boundary);
  get("epsilon", c.epsilon);
  get("noisy_registration", c.noisy_registration);
  get("hausdorff_samples", c.hausdorff_samples);

  known.insert("robot");
  if (j.contains("robot")) {
    const Json& r = j["robot"];
    const std::set<std::string> robot_keys = {"camera_base_height",
                                              "torso_min", "torso_max"};
    if (!r.is_object()) {
      errors.push_back("robot: must be an object");
    } else {
      for (const auto& [key, value] : r.items()) {
        if (!robot_keys.count(key)) {
          errors.push_back("robot." + key + ": unknown key");
        } else if (!value.is_number()) {
          errors.push_back("robot." + key + ": wrong type");
        }
      }
      if (r.contains("camera_base_height") &&
          r["camera_base_height"].is_number())
        c.robot.camera_base_height = r["camera_base_height"].get<double>();
      if (r.contains("torso_min") && r["torso_min"].is_number())
        c.robot.torso_min = r["torso_min"].get<double>();
      if (r.contains("torso_max") && r["torso_max"].is_number())
        c.robot.torso_max = r["torso_max"].get<double>();
    }
  }

  known.insert("noise");
  if (j.contains("noise")) {
    const Json& n = j["noise"];
    if (!n.is_object()) {
      errors.push_back("noise: must be an object");
    } else {
      for (const auto& [key, value] : n.items()) {
        if (key == "fraction" && value.is_number())
          c.noise.fraction = value.get<double>();
        else if (key == "steps" && value.is_number_integer())
          c.noise.steps = value.get<int>();
        else
          errors.push_back("noise." + key + ": unknown key or wrong type");
      }
    }
  }

  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!known.count(key)) errors.push_back(key + ": unknown key");
  }

  const std::vector<std::string> semantic = c.validate();
  errors.insert(errors.end(), semantic.begin(), semantic.end());
  if (!errors.empty()) {
    std::string message = "invalid config:";
    for (const std::string& e : errors) message += "\n  - " + e;
    throw ValidationError(message);
  }
  return c;
}

inline HarnessConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path);
  Json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  if (!j.is_object()) throw ParseError(path + ": config must be an object");
  return config_from_json(j);
}

}  // namespace nbvox
