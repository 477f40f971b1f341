#pragma once

#include <array>
#include <utility>
#include <vector>

#include "carp/geometry.hpp"
#include "carp/image.hpp"

namespace carp {

// Translation- and scale-normalized 4x4x4 occupancy histogram of one
// instance's back-projected cloud. Entries sum to 1.
struct ShapeDescriptor {
  std::array<double, 64> vector{};

  double l1_distance(const ShapeDescriptor& other) const {
    double d = 0;
    for (int i = 0; i < 64; ++i) d += std::abs(vector[i] - other.vector[i]);
    return d;
  }
};

// Single-instance view of the target object used as the matching query.
struct QueryObservation {
  DepthImage depth;
  MaskImage mask;  // non-negative labels mark the instance
  CameraIntrinsics intrinsics;
  RigidTransform camera_pose;
};

ShapeDescriptor describe(const DepthImage& depth, const MaskImage& mask,
                         const CameraIntrinsics& intrinsics,
                         const RigidTransform& camera_pose);

struct RecognitionResult {
  int target_id = -1;
  std::vector<std::pair<int, double>> distances;  // id -> L1, ascending id
};

// Nearest-descriptor match over the scene's instances; ties break to the
// lowest id.
RecognitionResult recognize_target(const DepthImage& scene_depth,
                                   const MaskImage& scene_mask,
                                   const CameraIntrinsics& intrinsics,
                                   const RigidTransform& camera_pose,
                                   const QueryObservation& query);

// Target cloud = pixels labeled target_id; structure cloud = every other
// finite-depth pixel (other objects, walls, ground).
std::pair<PointCloud, PointCloud> split_scene(const DepthImage& scene_depth,
                                              const MaskImage& scene_mask,
                                              int target_id,
                                              const CameraIntrinsics& intrinsics,
                                              const RigidTransform& camera_pose);

}  // namespace carp
