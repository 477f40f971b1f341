#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "carp/geometry.hpp"
#include "carp/scene.hpp"

namespace carp {

// Parallel-jaw hand swept as three boxes. The grasp frame has +z along the
// approach and x along the finger-closing axis; the origin sits at the palm
// face, fingers spanning z in [0, finger_length].
struct GripperModel {
  double finger_length = 0.05;
  double finger_width = 0.018;
  double finger_thickness = 0.010;
  double palm_depth = 0.025;
  double jaw_opening = 0.080;
  double approach_clearance = 0.10;

  bool is_valid() const {
    return finger_length > 0 && finger_width > 0 && finger_thickness > 0 &&
           palm_depth > 0 && jaw_opening > 2 * finger_thickness &&
           approach_clearance > 0;
  }

  // Palm + two fingers at the given pose, jaw at `opening` (defaults to
  // fully open).
  std::vector<Primitive> body_boxes(const RigidTransform& pose,
                                    double opening = -1.0) const;
};

struct GraspCandidate {
  RigidTransform pose;
  Vec3 grasp_point = Vec3::Zero();
  std::optional<double> p_c;
  std::optional<double> p_g;
  std::optional<double> p_f;
};

struct SamplerParams {
  double cone_angle_rad = 0.5235987755982988;  // 30 deg
  double max_standoff_frac = 0.5;              // of finger_length
  double normal_radius = 0.015;
};

// Antipodal-style sampler: surface point, anti-normal approach perturbed
// within a cone, uniform roll, uniform pull-back along -z. `view_origin`
// orients the surface normals (the camera position in practice). Fails if
// more than 90% of normal estimates are degenerate.
std::vector<GraspCandidate> sample_grasp_poses(const PointCloud& target, int n,
                                               const GripperModel& gripper,
                                               std::uint64_t seed,
                                               const Vec3& view_origin,
                                               const SamplerParams& params = {});

}  // namespace carp
