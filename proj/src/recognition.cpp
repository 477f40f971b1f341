#include "carp/recognition.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "carp/errors.hpp"

namespace carp {

namespace {

ShapeDescriptor describe_points(const std::vector<Vec3>& pts) {
  ShapeDescriptor desc;
  if (pts.empty()) throw InputError("describe: empty masked region");

  Vec3 centroid = Vec3::Zero();
  for (const Vec3& p : pts) centroid += p;
  centroid /= static_cast<double>(pts.size());

  double scale = 0.0;
  for (const Vec3& p : pts)
    scale = std::max(scale, (p - centroid).cwiseAbs().maxCoeff());
  if (scale <= 0.0) scale = 1.0;  // all points coincide: everything in one bin

  for (const Vec3& p : pts) {
    const Vec3 q = (p - centroid) / scale;  // in [-1, 1]^3
    int idx[3];
    for (int i = 0; i < 3; ++i)
      idx[i] = std::clamp(static_cast<int>(std::floor((q[i] + 1.0) * 2.0)), 0, 3);
    desc.vector[(idx[0] * 4 + idx[1]) * 4 + idx[2]] += 1.0;
  }
  for (double& v : desc.vector) v /= static_cast<double>(pts.size());
  return desc;
}

}  // namespace

ShapeDescriptor describe(const DepthImage& depth, const MaskImage& mask,
                         const CameraIntrinsics& intrinsics,
                         const RigidTransform& camera_pose) {
  const PointCloud cloud = back_project(depth, intrinsics, camera_pose, &mask);
  return describe_points(cloud.points);
}

RecognitionResult recognize_target(const DepthImage& scene_depth,
                                   const MaskImage& scene_mask,
                                   const CameraIntrinsics& intrinsics,
                                   const RigidTransform& camera_pose,
                                   const QueryObservation& query) {
  const ShapeDescriptor query_desc =
      describe(query.depth, query.mask, query.intrinsics, query.camera_pose);

  std::set<int> ids;
  for (int v = 0; v < scene_mask.height; ++v)
    for (int u = 0; u < scene_mask.width; ++u) {
      const int label = scene_mask.at(u, v);
      const double d = scene_depth.at(u, v);
      if (label >= 0 && std::isfinite(d) && d > 0.0) ids.insert(label);
    }
  if (ids.empty()) throw RecognitionError("recognize_target: no instances in scene");

  RecognitionResult result;
  double best = std::numeric_limits<double>::infinity();
  for (int id : ids) {
    MaskImage instance(scene_mask.width, scene_mask.height);
    for (std::size_t i = 0; i < scene_mask.labels.size(); ++i)
      instance.labels[i] = scene_mask.labels[i] == id ? id : -1;
    const ShapeDescriptor desc =
        describe(scene_depth, instance, intrinsics, camera_pose);
    const double dist = desc.l1_distance(query_desc);
    result.distances.emplace_back(id, dist);
    if (dist < best) {  // ties keep the lowest id (ids iterate ascending)
      best = dist;
      result.target_id = id;
    }
  }
  return result;
}

std::pair<PointCloud, PointCloud> split_scene(const DepthImage& scene_depth,
                                              const MaskImage& scene_mask,
                                              int target_id,
                                              const CameraIntrinsics& intrinsics,
                                              const RigidTransform& camera_pose) {
  bool present = false;
  for (std::int32_t label : scene_mask.labels)
    if (label == target_id) { present = true; break; }
  if (!present) throw InputError("split_scene: target id absent from mask");

  MaskImage target_mask(scene_mask.width, scene_mask.height);
  MaskImage structure_mask(scene_mask.width, scene_mask.height);
  for (std::size_t i = 0; i < scene_mask.labels.size(); ++i) {
    if (scene_mask.labels[i] == target_id)
      target_mask.labels[i] = 0;
    else
      structure_mask.labels[i] = 0;
  }
  PointCloud target = back_project(scene_depth, intrinsics, camera_pose, &target_mask);
  PointCloud structure =
      back_project(scene_depth, intrinsics, camera_pose, &structure_mask);
  target.role = CloudRole::Target;
  structure.role = CloudRole::Structure;
  return {std::move(target), std::move(structure)};
}

}  // namespace carp
