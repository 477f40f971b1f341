#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "carp/dataset.hpp"
#include "carp/geometry.hpp"
#include "carp/grasp.hpp"
#include "carp/scene.hpp"

namespace carp {

struct OracleParams {
  double sample_pitch = 0.005;      // gripper volume lattice pitch
  double approach_step = 0.005;     // spacing of swept approach poses
  double contact_ray_pitch = 0.0025;  // pad-face contact ray grid pitch
  double lift_height = 0.15;
  double friction_mu = 0.5;
};

// 1 iff no sample point of the gripper's swept volume (final pose plus the
// straight-line approach behind it) lies strictly inside any structure.
int collision_label(const std::vector<Primitive>& structures,
                    const GripperModel& gripper, const RigidTransform& pose,
                    double sample_pitch = 0.005, double approach_step = 0.005);

struct ContactInfo {
  bool hit = false;
  Vec3 point = Vec3::Zero();
  Vec3 normal = Vec3::Zero();
  double travel = 0;  // distance from the pad face along the closing axis
};

struct StabilityCheck {
  int label = 0;
  ContactInfo contact_pos;  // finger on the +x side
  ContactInfo contact_neg;
};

// Antipodal force-closure surrogate: per finger, rays are cast from a grid
// over the inner pad face toward the jaw center; the nearest hit is that
// finger's contact. Stable iff both contacts exist within the jaw span,
// both normals lie inside the friction cone about the closing axis, and
// both contacts sit within finger_length of the grasp point along the
// approach.
StabilityCheck stability_check(const std::vector<Primitive>& object,
                               const GripperModel& gripper,
                               const RigidTransform& pose,
                               double friction_mu = 0.5,
                               double contact_ray_pitch = 0.0025);

int stability_label(const std::vector<Primitive>& object, const GripperModel& gripper,
                    const RigidTransform& pose, double friction_mu = 0.5,
                    double contact_ray_pitch = 0.0025);

enum class GraspOutcome { PlanFail, GraspFail, Success };

// PlanFail on any structure collision of the approach sweep; GraspFail on
// an unstable grasp or a blocked 15 cm vertical lift of the closed gripper
// holding the target; Success otherwise.
GraspOutcome simulate_grasp_outcome(const SceneDescription& scene,
                                    const GripperModel& gripper,
                                    const RigidTransform& pose,
                                    const OracleParams& params = {});

struct DatasetGenParams {
  SceneGenConfig scene;
  GripperModel gripper;
  std::array<int, 3> grid_dims{40, 40, 40};
  double carp_voxel_size = 0.025;
  double gsp_voxel_size = 0.0025;
  double crop_half_extent = 0.05;
  int candidates_per_scene = 24;
  double positive_min = 0.3;  // enforced class balance window
  double positive_max = 0.7;
  int budget_factor = 20;  // sample budget = budget_factor * n_samples
  SamplerParams sampler;
  OracleParams oracle;
};

// Self-supervised dataset: scenes -> renders -> candidate grasps -> grids
// labeled by the matching oracle. Collision samples voxelize the structure
// cloud; stability samples voxelize the cropped scene cloud and come from
// structure-free tabletop scenes. Deterministic for any worker count.
std::vector<LabeledSample> generate_dataset(const DatasetGenParams& params,
                                            DatasetKind kind, int n_samples,
                                            std::uint64_t seed, int workers = 1);

const char* to_string(GraspOutcome o);
const char* to_string(DatasetKind k);

}  // namespace carp
