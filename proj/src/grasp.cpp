#include "carp/grasp.hpp"

#include <cmath>

#include "carp/errors.hpp"
#include "carp/rng.hpp"

namespace carp {

std::vector<Primitive> GripperModel::body_boxes(const RigidTransform& pose,
                                                double opening) const {
  const double jaw = opening < 0.0 ? jaw_opening : opening;
  std::vector<Primitive> boxes;
  const Vec3 finger_half(finger_thickness / 2, finger_width / 2, finger_length / 2);
  for (double side : {-1.0, 1.0}) {
    RigidTransform p = pose;
    p.translation = pose.apply(
        Vec3(side * (jaw / 2 + finger_thickness / 2), 0.0, finger_length / 2));
    boxes.push_back(Primitive::box(finger_half, p, -1));
  }
  RigidTransform palm = pose;
  palm.translation = pose.apply(Vec3(0.0, 0.0, -palm_depth / 2));
  boxes.push_back(Primitive::box(
      Vec3(jaw / 2 + finger_thickness, finger_width / 2, palm_depth / 2), palm, -1));
  return boxes;
}

namespace {

// Orthonormal frame with the given z axis; x chosen deterministically.
Mat3 frame_from_z(const Vec3& z_axis, double roll) {
  const Vec3 z = z_axis.normalized();
  Vec3 ref = std::abs(z.z()) < 0.9 ? Vec3(0, 0, 1) : Vec3(1, 0, 0);
  Vec3 x0 = ref.cross(z).normalized();
  const Vec3 y0 = z.cross(x0);
  const Vec3 x = std::cos(roll) * x0 + std::sin(roll) * y0;
  Mat3 r;
  r.col(0) = x;
  r.col(1) = z.cross(x);
  r.col(2) = z;
  return r;
}

// Unit vector within `angle` of `axis`, uniform in (tilt, azimuth).
Vec3 perturb_in_cone(const Vec3& axis, double max_angle, Rng& rng) {
  const double tilt = rng.uniform(0.0, max_angle);
  const double az = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
  const Mat3 base = frame_from_z(axis, 0.0);
  const Vec3 local(std::sin(tilt) * std::cos(az), std::sin(tilt) * std::sin(az),
                   std::cos(tilt));
  return base * local;
}

}  // namespace

std::vector<GraspCandidate> sample_grasp_poses(const PointCloud& target, int n,
                                               const GripperModel& gripper,
                                               std::uint64_t seed,
                                               const Vec3& view_origin,
                                               const SamplerParams& params) {
  if (target.empty()) throw InputError("sample_grasp_poses: empty target cloud");
  if (n < 1) throw InputError("sample_grasp_poses: n must be >= 1");
  if (!gripper.is_valid()) throw InputError("sample_grasp_poses: invalid gripper");

  Rng rng(derive_seed(seed, 0x6A5BULL));
  std::vector<GraspCandidate> out;
  out.reserve(n);

  std::size_t failures = 0;
  const std::size_t failure_budget = 9 * static_cast<std::size_t>(n) + 16;

  while (out.size() < static_cast<std::size_t>(n)) {
    const Vec3 p = target.points[rng.uniform_index(target.points.size())];
    Vec3 normal;
    try {
      normal = estimate_normal(target, p, params.normal_radius, view_origin);
    } catch (const EstimationError&) {
      if (++failures > failure_budget)
        throw EstimationError(
            "sample_grasp_poses: over 90% of normal estimates failed");
      continue;
    }
    const Vec3 approach = perturb_in_cone(-normal, params.cone_angle_rad, rng);
    const double roll = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
    const double standoff =
        rng.uniform(0.0, params.max_standoff_frac * gripper.finger_length);

    GraspCandidate cand;
    cand.pose.rotation = frame_from_z(approach, roll);
    cand.pose.translation = p - standoff * approach;
    cand.grasp_point = p;
    out.push_back(cand);
  }
  return out;
}

}  // namespace carp
