#pragma once

// Shape completion over a single captured view, plus observed-evidence
// fusion. A ViewFrame bundles everything one capture knows about the object:
// the camera, its depth image, an optional object mask, and the voxel grid
// fitted to the observed object points (the grid frame is the capture's
// camera frame).
//
// Completers turn one frame into a score grid over the frame's spec. The
// shadow completer is measurement-only: it carves the view and leaves the
// occlusion shadow at 0.5. The file completer replays grids computed by an
// external predictor, keyed by frame name.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "nbvox/completion/carve.hpp"
#include "nbvox/core/error.hpp"
#include "nbvox/views/camera.hpp"
#include "nbvox/voxel/grid.hpp"
#include "nbvox/voxel/score_io.hpp"

namespace nbvox {

struct ViewFrame {
  std::string key;     // stable identifier, names externally computed grids
  CameraModel camera;  // equals depth.camera
  DepthImage depth;
  std::vector<std::uint8_t> mask;  // per pixel, empty = all object
  ScoreGrid grid;  // voxelized observed object points, camera frame

  const std::vector<std::uint8_t>* mask_ptr() const {
    return mask.empty() ? nullptr : &mask;
  }

  void validate() const {
    camera.validate();
    grid.spec.validate();
    if (depth.camera.width != camera.width ||
        depth.camera.height != camera.height)
      throw ValidationError("view frame camera does not match depth image");
    if (!mask.empty() && mask.size() != depth.depth.size())
      throw ValidationError("view frame mask does not match depth image");
  }
};

/// Labels from carving this frame's depth into its own grid.
inline LabelGrid carve_frame(const ViewFrame& frame) {
  return ray_carve(frame.depth, frame.grid.spec, frame.mask_ptr());
}

/// Labels from carving `frame` into a grid living in another frame, via
/// frame_to_grid (this camera's frame -> grid frame).
inline LabelGrid carve_frame_into(const ViewFrame& frame, const GridSpec& spec,
                                  const RigidTransform& frame_to_grid) {
  LabelGrid grid(spec);
  carve_into(grid, frame.depth, frame_to_grid, frame.mask_ptr());
  return grid;
}

class Completer {
 public:
  virtual ~Completer() = default;
  virtual ScoreGrid complete(const ViewFrame& frame) const = 0;
  virtual std::string name() const = 0;
};

/// Measurement-only completion: observed surface 1, carved free space 0,
/// the occlusion shadow stays at 0.5. Thresholding at 0.5 yields the view's
/// visual hull.
class ShadowCompleter : public Completer {
 public:
  ScoreGrid complete(const ViewFrame& frame) const override {
    return scores_from_labels(carve_frame(frame));
  }
  std::string name() const override { return "shadow"; }
};

/// Replays score grids produced offline: looks up <directory>/<key>.sgrid.
/// The stored grid must match the frame's spec exactly.
class FileCompleter : public Completer {
 public:
  explicit FileCompleter(std::string directory)
      : directory_(std::move(directory)) {}

  ScoreGrid complete(const ViewFrame& frame) const override {
    if (frame.key.empty())
      throw ValidationError("file completion needs a frame key");
    const std::string path = directory_ + "/" + frame.key + ".sgrid";
    ScoreGrid grid = load_score_grid(path);
    if (!(grid.spec == frame.grid.spec))
      throw ValidationError(path + ": stored grid spec does not match frame");
    return grid;
  }
  std::string name() const override { return "file"; }

 private:
  std::string directory_;
};

/// Forces predicted scores to agree with observed evidence: cells a view
/// carved Empty drop to 0, cells with an observed surface sample rise to 1,
/// unobserved cells keep the prediction.
inline ScoreGrid apply_carving(const ScoreGrid& prediction,
                               const LabelGrid& observed) {
  if (!(prediction.spec == observed.spec))
    throw ValidationError("apply_carving requires identical specs");
  ScoreGrid out = prediction;
  for (std::size_t i = 0; i < out.scores.size(); ++i) {
    if (observed.labels[i] == VoxelLabel::Empty) out.scores[i] = 0.0f;
    else if (observed.labels[i] == VoxelLabel::Occupied) out.scores[i] = 1.0f;
  }
  return out;
}

/// Two-view volumetric fusion into the primary frame's grid. registration
/// maps the secondary camera frame into the primary camera frame. Surface
/// evidence wins over free space wins over unknown, per cell; fusing a frame
/// with itself under the identity reproduces the shadow completion exactly.
inline ScoreGrid fuse_views(const ViewFrame& primary,
                            const ViewFrame& secondary,
                            const RigidTransform& registration) {
  const LabelGrid a = carve_frame(primary);
  const LabelGrid b =
      carve_frame_into(secondary, primary.grid.spec, registration);
  return scores_from_labels(merge_grids(a, b));
}

}  // namespace nbvox
