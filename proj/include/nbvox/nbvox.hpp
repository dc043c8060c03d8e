#pragma once

// Umbrella header: the full perception pipeline, from depth capture to
// evaluation reports.

#include "nbvox/core/bvh.hpp"
#include "nbvox/core/cloud_io.hpp"
#include "nbvox/core/error.hpp"
#include "nbvox/core/geometry.hpp"
#include "nbvox/core/json.hpp"
#include "nbvox/core/mesh_io.hpp"
#include "nbvox/core/rng.hpp"
#include "nbvox/voxel/grid.hpp"
#include "nbvox/voxel/binvox.hpp"
#include "nbvox/voxel/score_io.hpp"
#include "nbvox/voxel/solid.hpp"
#include "nbvox/segmentation/segmentation.hpp"
#include "nbvox/views/camera.hpp"
#include "nbvox/views/depth_io.hpp"
#include "nbvox/views/render.hpp"
#include "nbvox/completion/carve.hpp"
#include "nbvox/completion/completer.hpp"
#include "nbvox/completion/marching_cubes.hpp"
#include "nbvox/nbv/nbv.hpp"
#include "nbvox/metrics/metrics.hpp"
#include "nbvox/noise/odometry.hpp"
#include "nbvox/harness/config.hpp"
#include "nbvox/harness/scene.hpp"
#include "nbvox/harness/trial.hpp"
#include "nbvox/harness/suite.hpp"
