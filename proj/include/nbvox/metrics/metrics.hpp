#pragma once

// Reconstruction and task metrics: voxel Jaccard index, one-directional
// Hausdorff distance via area-weighted surface sampling, and success
// weighted by path length (SPL) for navigation-style episode batches.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "nbvox/core/bvh.hpp"
#include "nbvox/core/error.hpp"
#include "nbvox/core/geometry.hpp"
#include "nbvox/core/json.hpp"
#include "nbvox/core/rng.hpp"
#include "nbvox/voxel/grid.hpp"

namespace nbvox {

/// |A intersect B| / |A union B| over occupied cells. Grids must share the
/// same spec. Two empty grids are perfectly similar (1.0).
inline double jaccard(const BinaryGrid& a, const BinaryGrid& b) {
  if (!(a.spec == b.spec))
    throw ValidationError("jaccard requires identical grid specs");
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.occupied.size(); ++i) {
    const bool pa = a.occupied[i] != 0;
    const bool pb = b.occupied[i] != 0;
    inter += pa && pb;
    uni += pa || pb;
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

/// max over n seeded samples of `from`'s surface of the distance to the
/// nearest point on `to`. Samples are area-weighted (uniform over the
/// surface); distances are exact point-to-triangle queries. Meters.
inline double hausdorff_one_direction(const TriangleMesh& from,
                                      const TriangleMesh& to, int samples,
                                      std::uint64_t seed) {
  if (samples < 1) throw ValidationError("need at least 1 surface sample");
  if (from.empty() || to.empty())
    throw DegenerateInputError("hausdorff over an empty mesh");

  std::vector<double> cumulative(from.faces.size());
  double total = 0.0;
  for (std::size_t f = 0; f < from.faces.size(); ++f) {
    total += from.face_area(f);
    cumulative[f] = total;
  }
  if (!(total > 0.0))
    throw DegenerateInputError("source mesh has zero surface area");

  const Bvh target(to);
  Rng rng(seed);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const double pick = rng.uniform() * total;
    const std::size_t f = static_cast<std::size_t>(
        std::lower_bound(cumulative.begin(), cumulative.end(), pick) -
        cumulative.begin());
    const std::size_t face = std::min(f, from.faces.size() - 1);
    // Uniform barycentric draw.
    const double r1 = std::sqrt(rng.uniform());
    const double r2 = rng.uniform();
    const Vec3 p = (1.0 - r1) * from.face_vertex(face, 0) +
                   r1 * (1.0 - r2) * from.face_vertex(face, 1) +
                   r1 * r2 * from.face_vertex(face, 2);
    worst = std::max(worst, target.closest_point(p).distance);
  }
  return worst;
}

/// Success weighted by path length over a batch of episodes:
/// mean of S_i * l_i / max(p_i, l_i), where l is the shortest path length,
/// p the taken path length, S the success flag. A successful episode with
/// l = p = 0 (started at the goal) scores 1.
struct Episode {
  bool success = false;
  double shortest_path = 0.0;  // l_i
  double taken_path = 0.0;     // p_i
};

inline double spl(const std::vector<Episode>& episodes) {
  if (episodes.empty()) throw ValidationError("spl over an empty batch");
  double sum = 0.0;
  for (const Episode& e : episodes) {
    if (!(e.shortest_path >= 0.0) || !(e.taken_path >= 0.0))
      throw ValidationError("path lengths must be non-negative");
    if (e.taken_path + 1e-12 < e.shortest_path)
      throw ValidationError("taken path shorter than the shortest path");
    if (!e.success) continue;
    const double denom = std::max(e.taken_path, e.shortest_path);
    sum += denom > 0.0 ? e.shortest_path / denom : 1.0;
  }
  return sum / static_cast<double>(episodes.size());
}

/// SPL applied end-to-end: an episode only counts as successful when the
/// final pick succeeded, not merely when navigation reached the goal.
/// Callers encode that in Episode::success; the arithmetic is shared.
inline double e2espl(const std::vector<Episode>& episodes) {
  return spl(episodes);
}

/// One labeled row of aggregate reconstruction quality.
struct MetricReport {
  std::string label;
  int trials = 0;
  double mean_jaccard = 0.0;
  double mean_hausdorff_mm = 0.0;
  std::uint64_t seed = 0;
};

inline Json to_json(const MetricReport& r) {
  Json j;
  j["label"] = r.label;
  j["trials"] = r.trials;
  j["mean_jaccard"] = r.mean_jaccard;
  j["mean_hausdorff_mm"] = r.mean_hausdorff_mm;
  j["seed"] = r.seed;
  return j;
}

inline std::string csv_header_metric_report() {
  return "label,trials,mean_jaccard,mean_hausdorff_mm,seed";
}

inline std::string to_csv_row(const MetricReport& r) {
  char buf[192];
  std::snprintf(buf, sizeof(buf), "%s,%d,%.9g,%.9g,%llu", r.label.c_str(),
                r.trials, r.mean_jaccard, r.mean_hausdorff_mm,
                static_cast<unsigned long long>(r.seed));
  return buf;
}

}  // namespace nbvox
