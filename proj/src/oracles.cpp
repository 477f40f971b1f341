#include "carp/oracles.hpp"

#include <algorithm>
#include <cmath>

#include "carp/errors.hpp"
#include "carp/parallel.hpp"
#include "carp/recognition.hpp"
#include "carp/rng.hpp"

namespace carp {

namespace {

// Inclusive lattice over a box given in grasp-local coordinates.
std::vector<Vec3> box_lattice(const Vec3& center, const Vec3& half, double pitch) {
  const int nx = pow2_intervals(2 * half.x(), pitch);
  const int ny = pow2_intervals(2 * half.y(), pitch);
  const int nz = pow2_intervals(2 * half.z(), pitch);
  std::vector<Vec3> pts;
  pts.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1) * (nz + 1));
  for (int i = 0; i <= nx; ++i)
    for (int j = 0; j <= ny; ++j)
      for (int k = 0; k <= nz; ++k)
        pts.emplace_back(center.x() - half.x() + 2 * half.x() * i / nx,
                         center.y() - half.y() + 2 * half.y() * j / ny,
                         center.z() - half.z() + 2 * half.z() * k / nz);
  return pts;
}

// Gripper body lattice in the grasp frame; jaw defaults to fully open.
std::vector<Vec3> gripper_lattice(const GripperModel& g, double pitch,
                                  double opening = -1.0) {
  const double jaw = opening < 0.0 ? g.jaw_opening : opening;
  std::vector<Vec3> pts;
  for (double side : {-1.0, 1.0}) {
    auto finger = box_lattice(
        Vec3(side * (jaw / 2 + g.finger_thickness / 2), 0, g.finger_length / 2),
        Vec3(g.finger_thickness / 2, g.finger_width / 2, g.finger_length / 2), pitch);
    pts.insert(pts.end(), finger.begin(), finger.end());
  }
  auto palm = box_lattice(Vec3(0, 0, -g.palm_depth / 2),
                          Vec3(jaw / 2 + g.finger_thickness, g.finger_width / 2,
                               g.palm_depth / 2),
                          pitch);
  pts.insert(pts.end(), palm.begin(), palm.end());
  return pts;
}

}  // namespace

int collision_label(const std::vector<Primitive>& structures,
                    const GripperModel& gripper, const RigidTransform& pose,
                    double sample_pitch, double approach_step) {
  if (!gripper.is_valid()) throw InputError("collision_label: invalid gripper");
  if (structures.empty()) return 1;

  const std::vector<Vec3> body = gripper_lattice(gripper, sample_pitch);
  const int steps = pow2_intervals(gripper.approach_clearance, approach_step);
  for (int k = 0; k <= steps; ++k) {
    const double retract = gripper.approach_clearance * k / steps;
    const Vec3 offset(0, 0, -retract);
    for (const Vec3& local : body) {
      if (signed_distance(structures, pose.apply(local + offset)) < 0.0) return 0;
    }
  }
  return 1;
}

StabilityCheck stability_check(const std::vector<Primitive>& object,
                               const GripperModel& gripper,
                               const RigidTransform& pose, double friction_mu,
                               double contact_ray_pitch) {
  if (!gripper.is_valid()) throw InputError("stability_check: invalid gripper");
  StabilityCheck out;
  if (object.empty()) return out;

  const Vec3 close_axis = pose.rotation.col(0);
  const Vec3 approach = pose.rotation.col(2);
  const int ny = pow2_intervals(gripper.finger_width, contact_ray_pitch);
  const int nz = pow2_intervals(gripper.finger_length, contact_ray_pitch);

  for (double side : {1.0, -1.0}) {
    ContactInfo best;
    best.travel = std::numeric_limits<double>::infinity();
    const Vec3 dir = -side * close_axis;
    for (int iy = 0; iy <= ny; ++iy) {
      for (int iz = 0; iz <= nz; ++iz) {
        const Vec3 local(side * gripper.jaw_opening / 2,
                         -gripper.finger_width / 2 + gripper.finger_width * iy / ny,
                         gripper.finger_length * iz / nz);
        const Vec3 origin = pose.apply(local);
        const auto hit = ray_cast(object, origin, dir, 1e-12, gripper.jaw_opening);
        if (hit && hit->t < best.travel) {
          best.hit = true;
          best.travel = hit->t;
          best.point = origin + hit->t * dir;
          best.normal = hit->normal;
        }
      }
    }
    (side > 0 ? out.contact_pos : out.contact_neg) = best;
  }

  if (!out.contact_pos.hit || !out.contact_neg.hit) return out;

  const double cone = std::atan(friction_mu);
  for (const ContactInfo* c : {&out.contact_pos, &out.contact_neg}) {
    const double cosang = std::min(1.0, std::abs(c->normal.dot(close_axis)));
    if (std::acos(cosang) > cone) return out;
    if (std::abs((c->point - pose.translation).dot(approach)) > gripper.finger_length)
      return out;
  }
  out.label = 1;
  return out;
}

int stability_label(const std::vector<Primitive>& object, const GripperModel& gripper,
                    const RigidTransform& pose, double friction_mu,
                    double contact_ray_pitch) {
  return stability_check(object, gripper, pose, friction_mu, contact_ray_pitch).label;
}

GraspOutcome simulate_grasp_outcome(const SceneDescription& scene,
                                    const GripperModel& gripper,
                                    const RigidTransform& pose,
                                    const OracleParams& params) {
  if (collision_label(scene.structures, gripper, pose, params.sample_pitch,
                      params.approach_step) == 0)
    return GraspOutcome::PlanFail;

  const SceneObject* target = scene.find_object(scene.target_id);
  if (!target) throw InputError("simulate_grasp_outcome: target id not in scene");

  const StabilityCheck chk =
      stability_check(target->parts, gripper, pose, params.friction_mu,
                      params.contact_ray_pitch);
  if (chk.label == 0) return GraspOutcome::GraspFail;

  // Lift the closed gripper and the held object straight up; the jaw is
  // narrowed to the contact separation.
  const Vec3 close_axis = pose.rotation.col(0);
  const double closed =
      std::abs((chk.contact_pos.point - chk.contact_neg.point).dot(close_axis));
  std::vector<Vec3> swept;
  for (const Vec3& local : gripper_lattice(gripper, params.sample_pitch, closed))
    swept.push_back(pose.apply(local));
  for (const Primitive& part : target->parts) {
    const auto pts = sample_volume_points(part, params.sample_pitch);
    swept.insert(swept.end(), pts.begin(), pts.end());
  }

  const int steps = pow2_intervals(params.lift_height, params.approach_step);
  for (int k = 0; k <= steps; ++k) {
    const Vec3 dz(0, 0, params.lift_height * k / steps);
    for (const Vec3& p : swept) {
      if (signed_distance(scene.structures, p + dz) < -1e-9)
        return GraspOutcome::GraspFail;
    }
  }
  return GraspOutcome::Success;
}

namespace {

struct SceneBatch {
  bool failed = false;
  std::vector<LabeledSample> samples;
};

SceneBatch make_scene_batch(const DatasetGenParams& params, DatasetKind kind,
                            std::uint64_t scene_seed) {
  SceneBatch batch;
  SceneGenConfig cfg = params.scene;
  if (kind == DatasetKind::Stability) cfg.tabletop = true;

  SceneDescription scene;
  try {
    scene = generate_scene(cfg, scene_seed);
  } catch (const GenerationError&) {
    batch.failed = true;
    return batch;
  }

  const auto [depth, mask] =
      render_depth(scene, cfg.intrinsics, cfg.camera_pose, cfg.depth_noise_sigma,
                   scene_seed);
  auto [target_cloud, structure_cloud] =
      split_scene(depth, mask, scene.target_id, cfg.intrinsics, cfg.camera_pose);
  if (target_cloud.size() < 8) {  // target (nearly) invisible from the camera
    batch.failed = true;
    return batch;
  }

  std::vector<GraspCandidate> candidates;
  try {
    candidates = sample_grasp_poses(target_cloud, params.candidates_per_scene,
                                    params.gripper, derive_seed(scene_seed, 1),
                                    cfg.camera_pose.translation, params.sampler);
  } catch (const std::runtime_error&) {
    batch.failed = true;
    return batch;
  }

  const SceneObject* target = scene.find_object(scene.target_id);
  PointCloud scene_cloud;
  if (kind == DatasetKind::Stability)
    scene_cloud = back_project(depth, cfg.intrinsics, cfg.camera_pose);

  for (std::size_t j = 0; j < candidates.size(); ++j) {
    const GraspCandidate& cand = candidates[j];
    LabeledSample sample;
    sample.kind = kind;
    sample.scene_seed = scene_seed;
    sample.candidate_index = static_cast<std::uint32_t>(j);
    if (kind == DatasetKind::Collision) {
      sample.grid = voxelize(structure_cloud, cand.pose, params.grid_dims,
                             params.carp_voxel_size);
      sample.label = static_cast<std::uint8_t>(
          collision_label(scene.structures, params.gripper, cand.pose,
                          params.oracle.sample_pitch, params.oracle.approach_step));
    } else {
      const PointCloud crop =
          center_crop(scene_cloud, cand.grasp_point, params.crop_half_extent);
      sample.grid = voxelize(crop, cand.pose, params.grid_dims, params.gsp_voxel_size);
      sample.label = static_cast<std::uint8_t>(
          stability_label(target->parts, params.gripper, cand.pose,
                          params.oracle.friction_mu, params.oracle.contact_ray_pitch));
    }
    batch.samples.push_back(std::move(sample));
  }
  return batch;
}

}  // namespace

std::vector<LabeledSample> generate_dataset(const DatasetGenParams& params,
                                            DatasetKind kind, int n_samples,
                                            std::uint64_t seed, int workers) {
  if (n_samples < 1) throw InputError("generate_dataset: n_samples must be >= 1");
  if (params.candidates_per_scene < 1)
    throw InputError("generate_dataset: candidates_per_scene must be >= 1");

  const long budget = static_cast<long>(params.budget_factor) * n_samples;
  const std::size_t class_cap = static_cast<std::size_t>(
      std::floor(params.positive_max * n_samples + 1e-9));

  std::vector<LabeledSample> out;
  out.reserve(n_samples);
  std::size_t counts[2] = {0, 0};
  long consumed = 0;
  std::uint64_t scene_index = 0;
  int consecutive_failures = 0;
  const int block = std::max(1, workers);

  while (out.size() < static_cast<std::size_t>(n_samples)) {
    std::vector<SceneBatch> batches(block);
    parallel_for(batches.size(), workers, [&](std::size_t b) {
      batches[b] = make_scene_batch(params, kind,
                                    derive_seed(seed, scene_index + b));
    });
    for (SceneBatch& batch : batches) {
      if (out.size() >= static_cast<std::size_t>(n_samples)) break;
      if (batch.failed) {
        if (++consecutive_failures > 200)
          throw GenerationError("generate_dataset: repeated scene failures");
        continue;
      }
      consecutive_failures = 0;
      for (LabeledSample& s : batch.samples) {
        if (out.size() >= static_cast<std::size_t>(n_samples)) break;
        ++consumed;
        const int cls = s.label ? 1 : 0;
        if (counts[cls] >= class_cap) continue;  // balance rejection
        ++counts[cls];
        out.push_back(std::move(s));
      }
    }
    scene_index += block;
    if (out.size() < static_cast<std::size_t>(n_samples) && consumed >= budget)
      throw GenerationError(
          "generate_dataset: class balance unreachable within sample budget");
  }
  return out;
}

const char* to_string(GraspOutcome o) {
  switch (o) {
    case GraspOutcome::PlanFail: return "plan_fail";
    case GraspOutcome::GraspFail: return "grasp_fail";
    case GraspOutcome::Success: return "success";
  }
  return "?";
}

const char* to_string(DatasetKind k) {
  return k == DatasetKind::Collision ? "collision" : "stability";
}

}  // namespace carp
