#pragma once

// Full evaluation runs: a mesh dataset crossed with seeded poses and
// second-view scenarios, executed on a small thread pool, reduced to
// per-scenario aggregates, and written out as reports.
//
// trials.csv and aggregates.json are functions of the config alone: no
// timestamps, no machine state, fixed formatting, rows sorted by
// (mesh, pose, scenario). Wall-clock details go to run_info.json, which is
// intentionally not deterministic.

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "nbvox/core/error.hpp"
#include "nbvox/core/mesh_io.hpp"
#include "nbvox/harness/config.hpp"
#include "nbvox/harness/trial.hpp"

namespace nbvox {

struct ScenarioStats {
  int trials = 0;
  int ok = 0;
  double mean_jaccard = 0.0;
  double mean_hausdorff_mm = 0.0;
  std::map<std::string, int> failures;
};

struct SuiteResult {
  std::vector<TrialResult> trials;
  std::map<std::string, ScenarioStats> stats;
  Json aggregates;

  double mean_jaccard(const std::string& scenario) const {
    return stats.at(scenario).mean_jaccard;
  }
};

namespace detail {

inline std::string stem_of(const std::string& path) {
  return std::filesystem::path(path).stem().string();
}

inline std::vector<std::pair<std::string, TriangleMesh>> load_dataset(
    const HarnessConfig& cfg) {
  std::vector<std::string> paths = cfg.mesh_paths;
  if (!cfg.mesh_dir.empty()) {
    if (!std::filesystem::is_directory(cfg.mesh_dir))
      throw IoError("mesh_dir is not a directory: " + cfg.mesh_dir);
    for (const auto& entry :
         std::filesystem::directory_iterator(cfg.mesh_dir)) {
      if (!entry.is_regular_file()) continue;
      std::string ext = entry.path().extension().string();
      for (char& ch : ext) ch = static_cast<char>(std::tolower(ch));
      if (ext == ".off" || ext == ".obj" || ext == ".stl")
        paths.push_back(entry.path().string());
    }
    std::sort(paths.begin(), paths.end());
  }
  if (paths.empty()) throw ValidationError("dataset contains no meshes");

  std::vector<std::pair<std::string, TriangleMesh>> out;
  std::map<std::string, std::string> seen;
  for (const std::string& path : paths) {
    const std::string name = stem_of(path);
    if (name.find(',') != std::string::npos ||
        name.find('\n') != std::string::npos)
      throw ValidationError("mesh name '" + name +
                            "' contains a reserved character");
    const auto [it, inserted] = seen.emplace(name, path);
    if (!inserted)
      throw ValidationError("duplicate mesh name '" + name + "' from " +
                            it->second + " and " + path);
    out.emplace_back(name, scale_to_grip_width(load_mesh(path),
                                               cfg.grip_width));
  }
  return out;
}

inline std::string format_double(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

inline std::string csv_cell(double v) {
  return std::isnan(v) ? std::string() : format_double(v);
}

inline std::string utc_now() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace detail

inline std::string trials_to_csv(const std::vector<TrialResult>& trials) {
  std::string out =
      "mesh,pose,scenario,status,jaccard,hausdorff_mm,"
      "v_nbv_x,v_nbv_y,v_nbv_z,used_fallback,seed\n";
  for (const TrialResult& t : trials) {
    out += t.mesh;
    out += ',' + std::to_string(t.pose);
    out += ',' + t.scenario;
    out += ',' + t.status;
    out += ',' + detail::csv_cell(t.jaccard);
    out += ',' + detail::csv_cell(t.hausdorff_mm);
    if (t.has_v_nbv) {
      out += ',' + detail::format_double(t.v_nbv.x());
      out += ',' + detail::format_double(t.v_nbv.y());
      out += ',' + detail::format_double(t.v_nbv.z());
    } else {
      out += ",,,";
    }
    out += ',';
    if (t.scenario == "nbv") out += t.used_fallback ? '1' : '0';
    out += ',' + std::to_string(t.seed);
    out += '\n';
  }
  return out;
}

inline SuiteResult run_suite(const HarnessConfig& cfg,
                             const std::string& out_dir = "") {
  {
    const std::vector<std::string> errors = cfg.validate();
    if (!errors.empty()) {
      std::string message = "invalid config:";
      for (const std::string& e : errors) message += "\n  - " + e;
      throw ValidationError(message);
    }
  }
  const std::string started = detail::utc_now();
  const auto t_start = std::chrono::steady_clock::now();

  const auto dataset = detail::load_dataset(cfg);
  std::vector<Scenario> scenarios;
  scenarios.reserve(cfg.scenarios.size());
  for (const std::string& s : cfg.scenarios)
    scenarios.push_back(scenario_from_string(s));

  std::unique_ptr<Completer> completer;
  if (cfg.completer == "file")
    completer = std::make_unique<FileCompleter>(cfg.completer_dir);
  else
    completer = std::make_unique<ShadowCompleter>();

  struct Task {
    int mesh_index;
    int pose_index;
  };
  std::vector<Task> tasks;
  for (int m = 0; m < static_cast<int>(dataset.size()); ++m)
    for (int p = 0; p < cfg.poses_per_mesh; ++p) tasks.push_back({m, p});

  const std::size_t per_task = scenarios.size();
  std::vector<TrialResult> results(tasks.size() * per_task);

  std::atomic<std::size_t> cursor{0};
  const auto worker = [&]() {
    while (true) {
      const std::size_t task_index = cursor.fetch_add(1);
      if (task_index >= tasks.size()) return;
      const Task task = tasks[task_index];
      const auto& [name, mesh] = dataset[static_cast<std::size_t>(
          task.mesh_index)];
      TrialResult* slots = &results[task_index * per_task];
      try {
        const auto t0 = std::chrono::steady_clock::now();
        const StagedScene staged =
            stage_scene(mesh, name, task.mesh_index, task.pose_index, cfg);
        const FirstView fv = compute_first_view(staged, cfg, *completer);
        const double shared_ms =
            std::chrono::duration<double, std::milli>(
                std::chrono::steady_clock::now() - t0)
                .count() /
            static_cast<double>(per_task);
        for (std::size_t s = 0; s < per_task; ++s) {
          const auto t1 = std::chrono::steady_clock::now();
          slots[s] = run_trial(staged, fv, scenarios[s], cfg);
          slots[s].wall_ms =
              shared_ms + std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - t1)
                              .count();
        }
      } catch (const Error& e) {
        for (std::size_t s = 0; s < per_task; ++s) {
          slots[s].mesh = name;
          slots[s].pose = task.pose_index;
          slots[s].scenario = to_string(scenarios[s]);
          slots[s].status = e.category();
          slots[s].detail = e.what();
        }
      } catch (const std::exception& e) {
        for (std::size_t s = 0; s < per_task; ++s) {
          slots[s].mesh = name;
          slots[s].pose = task.pose_index;
          slots[s].scenario = to_string(scenarios[s]);
          slots[s].status = "error";
          slots[s].detail = e.what();
        }
      }
    }
  };

  const int thread_count =
      std::max(1, std::min<int>(cfg.jobs, static_cast<int>(tasks.size())));
  if (thread_count == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(thread_count));
    for (int i = 0; i < thread_count; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  std::sort(results.begin(), results.end(),
            [](const TrialResult& a, const TrialResult& b) {
              if (a.mesh != b.mesh) return a.mesh < b.mesh;
              if (a.pose != b.pose) return a.pose < b.pose;
              return a.scenario < b.scenario;
            });

  SuiteResult suite;
  suite.trials = std::move(results);

  for (const TrialResult& t : suite.trials) {
    ScenarioStats& st = suite.stats[t.scenario];
    ++st.trials;
    if (t.status == "ok") {
      ++st.ok;
      st.mean_jaccard += t.jaccard;
      st.mean_hausdorff_mm += t.hausdorff_mm;
    } else {
      ++st.failures[t.status];
    }
  }
  for (auto& [name, st] : suite.stats) {
    (void)name;
    if (st.ok > 0) {
      st.mean_jaccard /= st.ok;
      st.mean_hausdorff_mm /= st.ok;
    }
  }

  Json scenarios_json;
  for (const auto& [name, st] : suite.stats) {
    Json s;
    s["trials"] = st.trials;
    s["ok"] = st.ok;
    if (st.ok > 0) {
      s["mean_jaccard"] = st.mean_jaccard;
      s["mean_hausdorff_mm"] = st.mean_hausdorff_mm;
    } else {
      s["mean_jaccard"] = nullptr;
      s["mean_hausdorff_mm"] = nullptr;
    }
    Json f = Json::object();
    for (const auto& [category, count] : st.failures) f[category] = count;
    s["failures"] = f;
    scenarios_json[name] = s;
  }
  suite.aggregates["trial_count"] = suite.trials.size();
  suite.aggregates["meshes"] = dataset.size();
  suite.aggregates["scenarios"] = scenarios_json;
  suite.aggregates["config"] = to_json(cfg);

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    {
      std::ofstream csv(out_dir + "/trials.csv", std::ios::binary);
      if (!csv) throw IoError("cannot write " + out_dir + "/trials.csv");
      csv << trials_to_csv(suite.trials);
    }
    {
      std::ofstream agg(out_dir + "/aggregates.json", std::ios::binary);
      if (!agg)
        throw IoError("cannot write " + out_dir + "/aggregates.json");
      agg << suite.aggregates.dump(2) << '\n';
    }
    {
      Json info;
      info["started_utc"] = started;
      info["finished_utc"] = detail::utc_now();
      info["wall_ms_total"] =
          std::chrono::duration<double, std::milli>(
              std::chrono::steady_clock::now() - t_start)
              .count();
      info["jobs"] = thread_count;
      Json timings = Json::array();
      for (const TrialResult& t : suite.trials) {
        Json row;
        row["mesh"] = t.mesh;
        row["pose"] = t.pose;
        row["scenario"] = t.scenario;
        row["wall_ms"] = t.wall_ms;
        if (!t.detail.empty()) row["detail"] = t.detail;
        timings.push_back(row);
      }
      info["trials"] = timings;
      std::ofstream out(out_dir + "/run_info.json", std::ios::binary);
      if (!out) throw IoError("cannot write " + out_dir + "/run_info.json");
      out << info.dump(2) << '\n';
    }
  }
  return suite;
}

}  // namespace nbvox
