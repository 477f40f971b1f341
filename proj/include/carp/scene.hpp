#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "carp/geometry.hpp"
#include "carp/image.hpp"

namespace carp {

enum class ShapeKind { Box, Cylinder, Sphere };

// One analytic solid. Box: size = half extents (x,y,z). Cylinder: z-aligned
// in its local frame, size = (radius, half_height, 0). Sphere: size =
// (radius, 0, 0).
struct Primitive {
  ShapeKind shape = ShapeKind::Box;
  Vec3 size = Vec3(0.02, 0.02, 0.02);
  RigidTransform pose;
  int id = 0;

  static Primitive box(const Vec3& half_extents, const RigidTransform& pose, int id);
  static Primitive cylinder(double radius, double half_height,
                            const RigidTransform& pose, int id);
  static Primitive sphere(double radius, const RigidTransform& pose, int id);

  // Radius of the bounding sphere about the local origin.
  double bounding_radius() const;
  // Support distance in world direction `dir` (unit), measured from the
  // primitive's origin. Used for quasi-static settling.
  double support(const Vec3& dir) const;
};

// A movable scene object: one primitive, or two welded ones for the
// compound "novel object" vocabulary. All parts share the object id.
struct SceneObject {
  int id = 0;
  std::vector<Primitive> parts;

  double top_z() const;
};

struct SceneDescription {
  std::vector<Primitive> structures;  // ground plane first, then panels
  std::vector<SceneObject> objects;
  int target_id = 0;
  std::uint64_t rng_seed = 0;

  const SceneObject* find_object(int id) const;
  std::vector<Primitive> object_parts() const;  // all parts of all objects
};

enum class StructureKind { Wall, LargeBin, SmallBin };
enum class Arrangement { Standard, Challenging };

struct SceneGenConfig {
  StructureKind structure_kind = StructureKind::SmallBin;
  double extent_min = 0.3;  // workspace structure footprint range, meters
  double extent_max = 0.5;
  int n_objects = 5;
  Arrangement arrangement = Arrangement::Standard;
  CameraIntrinsics intrinsics{160.0, 160.0, 80.0, 60.0, 160, 120};
  RigidTransform camera_pose;  // camera->world; defaulted by default_camera()
  double finger_width = 0.018;  // drives the challenging-placement gap
  double depth_noise_sigma = 0.0;
  bool compound_objects = false;  // two-primitive novel objects
  bool tabletop = false;          // drop all panels (ground plane only)

  SceneGenConfig();
};

// Interval count for lattice sampling: ceil(length/pitch) rounded up to the
// next power of two, so halving the pitch always refines in place.
int pow2_intervals(double length, double pitch);

// Overhead-oblique view of the workspace origin.
RigidTransform default_camera_pose();
RigidTransform look_at(const Vec3& eye, const Vec3& target,
                       const Vec3& up_hint = Vec3(0, 0, 1));

// Exact signed distance (negative inside) to one primitive.
double signed_distance(const Primitive& prim, const Vec3& p);
// Minimum over a non-empty set; throws InputError on an empty list.
double signed_distance(const std::vector<Primitive>& prims, const Vec3& p);

struct RayHit {
  double t = 0;       // ray parameter (units of the direction vector)
  Vec3 normal;        // outward world-frame normal at the hit
  int prim_index = -1;
};

// First intersection with t in (t_min, t_max]; direction need not be unit.
std::optional<RayHit> ray_cast(const std::vector<Primitive>& prims,
                               const Vec3& origin, const Vec3& dir,
                               double t_min = 1e-9,
                               double t_max = std::numeric_limits<double>::infinity());

// Inclusive lattice over the primitive's volume in its local frame,
// transformed to world. Interval counts round up to a power of two so a
// halved pitch always yields a superset of points.
std::vector<Vec3> sample_volume_points(const Primitive& prim, double pitch);
std::vector<Vec3> sample_surface_points(const Primitive& prim, double pitch);

// Disjointness oracle: no volume sample of `object` falls strictly inside
// any of `others`.
bool overlaps(const std::vector<Primitive>& object,
              const std::vector<Primitive>& others, double pitch = 0.005);

// Min over surface samples of the signed distance to `prims` (panels).
double min_surface_distance(const std::vector<Primitive>& object,
                            const std::vector<Primitive>& prims,
                            double pitch = 0.0025);

// Deterministic scene synthesis; throws GenerationError after 1000 failed
// placement attempts for any object.
SceneDescription generate_scene(const SceneGenConfig& config, std::uint64_t seed);

// Analytic ray-cast render. Depth is distance along the optical axis; mask
// carries object ids, -1 for structure and background.
std::pair<DepthImage, MaskImage> render_depth(const SceneDescription& scene,
                                              const CameraIntrinsics& intrinsics,
                                              const RigidTransform& camera_pose,
                                              double noise_sigma = 0.0,
                                              std::uint64_t noise_seed = 0);

const char* to_string(StructureKind k);
const char* to_string(Arrangement a);

}  // namespace carp
