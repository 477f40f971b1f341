#include "carp/scene.hpp"

#include <algorithm>
#include <cmath>

#include "carp/errors.hpp"
#include "carp/rng.hpp"

namespace carp {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kRayEps = 1e-12;

}  // namespace

int pow2_intervals(double length, double pitch) {
  int n = std::max(1, static_cast<int>(std::ceil(length / pitch)));
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

Primitive Primitive::box(const Vec3& half_extents, const RigidTransform& pose, int id) {
  if (!(half_extents.minCoeff() > 0.0)) throw InputError("Primitive::box: size must be > 0");
  return Primitive{ShapeKind::Box, half_extents, pose, id};
}

Primitive Primitive::cylinder(double radius, double half_height,
                              const RigidTransform& pose, int id) {
  if (!(radius > 0.0) || !(half_height > 0.0))
    throw InputError("Primitive::cylinder: size must be > 0");
  return Primitive{ShapeKind::Cylinder, Vec3(radius, half_height, 0.0), pose, id};
}

Primitive Primitive::sphere(double radius, const RigidTransform& pose, int id) {
  if (!(radius > 0.0)) throw InputError("Primitive::sphere: size must be > 0");
  return Primitive{ShapeKind::Sphere, Vec3(radius, 0.0, 0.0), pose, id};
}

double Primitive::bounding_radius() const {
  switch (shape) {
    case ShapeKind::Box: return size.norm();
    case ShapeKind::Cylinder: return std::hypot(size.x(), size.y());
    case ShapeKind::Sphere: return size.x();
  }
  return 0.0;
}

double Primitive::support(const Vec3& dir) const {
  switch (shape) {
    case ShapeKind::Box: {
      double s = 0.0;
      for (int i = 0; i < 3; ++i) s += size[i] * std::abs(dir.dot(pose.rotation.col(i)));
      return s;
    }
    case ShapeKind::Cylinder: {
      const Vec3 axis = pose.rotation.col(2);
      const double along = std::abs(dir.dot(axis));
      const double radial = (dir - dir.dot(axis) * axis).norm();
      return size.y() * along + size.x() * radial;
    }
    case ShapeKind::Sphere: return size.x();
  }
  return 0.0;
}

double SceneObject::top_z() const {
  double top = -std::numeric_limits<double>::infinity();
  for (const Primitive& p : parts)
    top = std::max(top, p.pose.translation.z() + p.support(Vec3(0, 0, 1)));
  return top;
}

const SceneObject* SceneDescription::find_object(int id) const {
  for (const SceneObject& o : objects)
    if (o.id == id) return &o;
  return nullptr;
}

std::vector<Primitive> SceneDescription::object_parts() const {
  std::vector<Primitive> all;
  for (const SceneObject& o : objects)
    for (const Primitive& p : o.parts) all.push_back(p);
  return all;
}

SceneGenConfig::SceneGenConfig() { camera_pose = default_camera_pose(); }

RigidTransform look_at(const Vec3& eye, const Vec3& target, const Vec3& up_hint) {
  const Vec3 forward = (target - eye).normalized();
  Vec3 up = up_hint;
  if (std::abs(forward.dot(up.normalized())) > 0.99) up = Vec3(1, 0, 0);
  const Vec3 right = forward.cross(up).normalized() * -1.0;  // +x right, +y down
  const Vec3 down = forward.cross(right).normalized();
  RigidTransform t;
  t.rotation.col(0) = right;
  t.rotation.col(1) = down;
  t.rotation.col(2) = forward;
  if (t.rotation.determinant() < 0) t.rotation.col(0) = -t.rotation.col(0);
  t.translation = eye;
  return t;
}

RigidTransform default_camera_pose() {
  return look_at(Vec3(0.30, 0.0, 0.75), Vec3(0.0, 0.0, 0.02));
}

double signed_distance(const Primitive& prim, const Vec3& p) {
  const Vec3 q = prim.pose.apply_inverse(p);
  switch (prim.shape) {
    case ShapeKind::Box: {
      const Vec3 d = q.cwiseAbs() - prim.size;
      const Vec3 outside = d.cwiseMax(0.0);
      const double inside = std::min(d.maxCoeff(), 0.0);
      return outside.norm() + inside;
    }
    case ShapeKind::Cylinder: {
      const double dr = std::hypot(q.x(), q.y()) - prim.size.x();
      const double dz = std::abs(q.z()) - prim.size.y();
      const double ox = std::max(dr, 0.0), oz = std::max(dz, 0.0);
      return std::hypot(ox, oz) + std::min(std::max(dr, dz), 0.0);
    }
    case ShapeKind::Sphere: return q.norm() - prim.size.x();
  }
  return 0.0;
}

double signed_distance(const std::vector<Primitive>& prims, const Vec3& p) {
  if (prims.empty()) throw InputError("signed_distance: empty primitive list");
  double best = std::numeric_limits<double>::infinity();
  for (const Primitive& prim : prims) best = std::min(best, signed_distance(prim, p));
  return best;
}

namespace {

struct LocalHit {
  double t;
  Vec3 normal_local;
};

bool intersect_box(const Vec3& o, const Vec3& d, const Vec3& h, double t_min,
                   double t_max, LocalHit& hit) {
  double tlo = -std::numeric_limits<double>::infinity();
  double thi = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) {
    if (std::abs(d[i]) < kRayEps) {
      if (std::abs(o[i]) > h[i]) return false;
      continue;
    }
    double t1 = (-h[i] - o[i]) / d[i];
    double t2 = (h[i] - o[i]) / d[i];
    if (t1 > t2) std::swap(t1, t2);
    tlo = std::max(tlo, t1);
    thi = std::min(thi, t2);
  }
  if (tlo > thi) return false;
  double t = tlo;
  if (t <= t_min) t = thi;  // origin inside the box: take the exit
  if (t <= t_min || t > t_max) return false;
  const Vec3 p = o + t * d;
  int axis = 0;
  double best = -1.0;
  for (int i = 0; i < 3; ++i) {
    const double m = std::abs(p[i]) / h[i];
    if (m > best) { best = m; axis = i; }
  }
  hit.t = t;
  hit.normal_local = Vec3::Zero();
  hit.normal_local[axis] = p[axis] >= 0 ? 1.0 : -1.0;
  return true;
}

bool intersect_sphere(const Vec3& o, const Vec3& d, double r, double t_min,
                      double t_max, LocalHit& hit) {
  const double a = d.squaredNorm();
  if (a < kRayEps) return false;
  const double b = 2.0 * o.dot(d);
  const double c = o.squaredNorm() - r * r;
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return false;
  const double sq = std::sqrt(disc);
  double t = (-b - sq) / (2.0 * a);
  if (t <= t_min) t = (-b + sq) / (2.0 * a);
  if (t <= t_min || t > t_max) return false;
  hit.t = t;
  hit.normal_local = (o + t * d) / r;
  return true;
}

bool intersect_cylinder(const Vec3& o, const Vec3& d, double r, double hh,
                        double t_min, double t_max, LocalHit& hit) {
  double best_t = std::numeric_limits<double>::infinity();
  Vec3 best_n;
  bool found = false;

  const double a = d.x() * d.x() + d.y() * d.y();
  if (a > kRayEps) {
    const double b = 2.0 * (o.x() * d.x() + o.y() * d.y());
    const double c = o.x() * o.x() + o.y() * o.y() - r * r;
    const double disc = b * b - 4.0 * a * c;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      for (const double t : {(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)}) {
        if (t <= t_min || t > t_max || t >= best_t) continue;
        const double z = o.z() + t * d.z();
        if (std::abs(z) <= hh) {
          const Vec3 p = o + t * d;
          best_t = t;
          best_n = Vec3(p.x() / r, p.y() / r, 0.0);
          found = true;
        }
      }
    }
  }
  if (std::abs(d.z()) > kRayEps) {
    for (const double sign : {-1.0, 1.0}) {
      const double t = (sign * hh - o.z()) / d.z();
      if (t <= t_min || t > t_max || t >= best_t) continue;
      const double x = o.x() + t * d.x();
      const double y = o.y() + t * d.y();
      if (x * x + y * y <= r * r) {
        best_t = t;
        best_n = Vec3(0, 0, sign);
        found = true;
      }
    }
  }
  if (!found) return false;
  hit.t = best_t;
  hit.normal_local = best_n;
  return true;
}

}  // namespace

std::optional<RayHit> ray_cast(const std::vector<Primitive>& prims,
                               const Vec3& origin, const Vec3& dir,
                               double t_min, double t_max) {
  std::optional<RayHit> best;
  for (std::size_t i = 0; i < prims.size(); ++i) {
    const Primitive& prim = prims[i];
    const Vec3 o = prim.pose.apply_inverse(origin);
    const Vec3 d = prim.pose.rotation.transpose() * dir;
    const double limit = best ? best->t : t_max;
    LocalHit lh;
    bool ok = false;
    switch (prim.shape) {
      case ShapeKind::Box: ok = intersect_box(o, d, prim.size, t_min, limit, lh); break;
      case ShapeKind::Sphere: ok = intersect_sphere(o, d, prim.size.x(), t_min, limit, lh); break;
      case ShapeKind::Cylinder:
        ok = intersect_cylinder(o, d, prim.size.x(), prim.size.y(), t_min, limit, lh);
        break;
    }
    if (ok) {
      RayHit hit;
      hit.t = lh.t;
      hit.normal = prim.pose.rotation * lh.normal_local;
      hit.prim_index = static_cast<int>(i);
      best = hit;
    }
  }
  return best;
}

std::vector<Vec3> sample_volume_points(const Primitive& prim, double pitch) {
  if (!(pitch > 0.0)) throw InputError("sample_volume_points: pitch must be > 0");
  std::vector<Vec3> pts;
  auto lattice = [&](const Vec3& half, auto&& keep) {
    const int nx = pow2_intervals(2 * half.x(), pitch);
    const int ny = pow2_intervals(2 * half.y(), pitch);
    const int nz = pow2_intervals(2 * half.z(), pitch);
    for (int i = 0; i <= nx; ++i)
      for (int j = 0; j <= ny; ++j)
        for (int k = 0; k <= nz; ++k) {
          const Vec3 q(-half.x() + 2 * half.x() * i / nx,
                       -half.y() + 2 * half.y() * j / ny,
                       -half.z() + 2 * half.z() * k / nz);
          if (keep(q)) pts.push_back(prim.pose.apply(q));
        }
  };
  switch (prim.shape) {
    case ShapeKind::Box:
      lattice(prim.size, [](const Vec3&) { return true; });
      break;
    case ShapeKind::Cylinder: {
      const double r = prim.size.x(), hh = prim.size.y();
      lattice(Vec3(r, r, hh), [r](const Vec3& q) {
        return q.x() * q.x() + q.y() * q.y() <= r * r + 1e-12;
      });
      break;
    }
    case ShapeKind::Sphere: {
      const double r = prim.size.x();
      lattice(Vec3(r, r, r), [r](const Vec3& q) {
        return q.squaredNorm() <= r * r + 1e-12;
      });
      break;
    }
  }
  return pts;
}

std::vector<Vec3> sample_surface_points(const Primitive& prim, double pitch) {
  if (!(pitch > 0.0)) throw InputError("sample_surface_points: pitch must be > 0");
  std::vector<Vec3> pts;
  switch (prim.shape) {
    case ShapeKind::Box: {
      const Vec3 h = prim.size;
      for (int axis = 0; axis < 3; ++axis) {
        const int a1 = (axis + 1) % 3, a2 = (axis + 2) % 3;
        const int n1 = pow2_intervals(2 * h[a1], pitch);
        const int n2 = pow2_intervals(2 * h[a2], pitch);
        for (double side : {-1.0, 1.0})
          for (int i = 0; i <= n1; ++i)
            for (int j = 0; j <= n2; ++j) {
              Vec3 q;
              q[axis] = side * h[axis];
              q[a1] = -h[a1] + 2 * h[a1] * i / n1;
              q[a2] = -h[a2] + 2 * h[a2] * j / n2;
              pts.push_back(prim.pose.apply(q));
            }
      }
      break;
    }
    case ShapeKind::Cylinder: {
      const double r = prim.size.x(), hh = prim.size.y();
      const int nt = pow2_intervals(2 * kPi * r, pitch);
      const int nz = pow2_intervals(2 * hh, pitch);
      for (int i = 0; i < nt; ++i) {
        const double th = 2 * kPi * i / nt;
        for (int k = 0; k <= nz; ++k)
          pts.push_back(prim.pose.apply(
              Vec3(r * std::cos(th), r * std::sin(th), -hh + 2 * hh * k / nz)));
      }
      const int nr = pow2_intervals(2 * r, pitch);
      for (double side : {-1.0, 1.0})
        for (int i = 0; i <= nr; ++i)
          for (int j = 0; j <= nr; ++j) {
            const Vec3 q(-r + 2 * r * i / nr, -r + 2 * r * j / nr, side * hh);
            if (q.x() * q.x() + q.y() * q.y() <= r * r)
              pts.push_back(prim.pose.apply(q));
          }
      break;
    }
    case ShapeKind::Sphere: {
      const double r = prim.size.x();
      const int np = pow2_intervals(kPi * r, pitch);
      const int nt = pow2_intervals(2 * kPi * r, pitch);
      for (int i = 0; i <= np; ++i) {
        const double phi = kPi * i / np;
        for (int j = 0; j < nt; ++j) {
          const double th = 2 * kPi * j / nt;
          pts.push_back(prim.pose.apply(Vec3(r * std::sin(phi) * std::cos(th),
                                             r * std::sin(phi) * std::sin(th),
                                             r * std::cos(phi))));
        }
      }
      break;
    }
  }
  return pts;
}

bool overlaps(const std::vector<Primitive>& object,
              const std::vector<Primitive>& others, double pitch) {
  if (others.empty()) return false;
  for (const Primitive& part : object)
    for (const Vec3& p : sample_volume_points(part, pitch))
      if (signed_distance(others, p) < 0.0) return true;
  return false;
}

double min_surface_distance(const std::vector<Primitive>& object,
                            const std::vector<Primitive>& prims, double pitch) {
  double best = std::numeric_limits<double>::infinity();
  for (const Primitive& part : object)
    for (const Vec3& p : sample_surface_points(part, pitch))
      best = std::min(best, signed_distance(prims, p));
  return best;
}

namespace {

RigidTransform yawed(double yaw, const Vec3& t = Vec3::Zero()) {
  return rotation_about(Vec3(0, 0, 1), yaw, t);
}

// The six axis-aligned rest orientations of a box.
Mat3 box_rest_rotation(int face) {
  switch (face) {
    case 0: return Mat3::Identity();
    case 1: return Eigen::AngleAxisd(kPi, Vec3(1, 0, 0)).toRotationMatrix();
    case 2: return Eigen::AngleAxisd(kPi / 2, Vec3(1, 0, 0)).toRotationMatrix();
    case 3: return Eigen::AngleAxisd(-kPi / 2, Vec3(1, 0, 0)).toRotationMatrix();
    case 4: return Eigen::AngleAxisd(kPi / 2, Vec3(0, 1, 0)).toRotationMatrix();
    default: return Eigen::AngleAxisd(-kPi / 2, Vec3(0, 1, 0)).toRotationMatrix();
  }
}

struct StructureLayout {
  std::vector<Primitive> panels;  // excluding ground
  double region_half = 0.12;     // object placement half-extent around origin
};

StructureLayout build_structure(const SceneGenConfig& cfg, Rng& rng) {
  StructureLayout out;
  const double yaw = rng.uniform(0.0, 2 * kPi);
  const double extent = rng.uniform(cfg.extent_min, cfg.extent_max);
  const double half_th = 0.006;
  int next_id = 1001;

  auto add_panel = [&](const Vec3& half, const Vec3& local_center) {
    RigidTransform pose = yawed(yaw);
    pose.translation = pose.rotation * local_center;
    out.panels.push_back(Primitive::box(half, pose, next_id++));
  };

  switch (cfg.structure_kind) {
    case StructureKind::Wall: {
      const double h = rng.uniform(0.10, 0.18);
      const double dist = rng.uniform(0.06, 0.13);
      add_panel(Vec3(extent / 2, half_th, h / 2), Vec3(0, dist + half_th, h / 2));
      out.region_half = 0.13;
      break;
    }
    case StructureKind::LargeBin:
    case StructureKind::SmallBin: {
      const double inner =
          cfg.structure_kind == StructureKind::LargeBin ? extent : 0.55 * extent;
      const double h = rng.uniform(0.08, 0.14);
      const double off = inner / 2 + half_th;
      const double long_half = inner / 2 + 2 * half_th;
      add_panel(Vec3(half_th, long_half, h / 2), Vec3(off, 0, h / 2));
      add_panel(Vec3(half_th, long_half, h / 2), Vec3(-off, 0, h / 2));
      add_panel(Vec3(long_half, half_th, h / 2), Vec3(0, off, h / 2));
      add_panel(Vec3(long_half, half_th, h / 2), Vec3(0, -off, h / 2));
      out.region_half = std::max(0.04, inner / 2 - 0.02);
      break;
    }
  }
  return out;
}

// Parts are built in the object frame (origin on the ground) and then
// placed; rotations are rest-stable (axis-aligned faces or lying/upright
// cylinders) plus a free yaw.
std::vector<Primitive> make_object_parts(int obj_id, int shape_pick, bool compound,
                                         Rng& rng) {
  std::vector<Primitive> parts;
  const double yaw = rng.uniform(0.0, 2 * kPi);

  auto base_primitive = [&](int pick) -> Primitive {
    switch (pick % 3) {
      case 0: {
        const Vec3 half(rng.uniform(0.013, 0.030), rng.uniform(0.013, 0.030),
                        rng.uniform(0.013, 0.030));
        RigidTransform pose;
        pose.rotation = yawed(yaw).rotation * box_rest_rotation(rng.uniform_int(0, 5));
        return Primitive::box(half, pose, obj_id);
      }
      case 1: {
        const double r = rng.uniform(0.013, 0.028);
        const double hh = rng.uniform(0.015, 0.032);
        RigidTransform pose;
        const bool lying = rng.uniform() < 0.5;
        pose.rotation = yawed(yaw).rotation;
        if (lying)
          pose.rotation = pose.rotation *
                          Eigen::AngleAxisd(kPi / 2, Vec3(1, 0, 0)).toRotationMatrix();
        return Primitive::cylinder(r, hh, pose, obj_id);
      }
      default:
        return Primitive::sphere(rng.uniform(0.016, 0.030), RigidTransform{}, obj_id);
    }
  };

  Primitive base = base_primitive(shape_pick);
  base.pose.translation = Vec3(0, 0, base.support(Vec3(0, 0, -1)));
  parts.push_back(base);

  if (compound) {
    Primitive cap = base_primitive(shape_pick + 1 + rng.uniform_int(0, 1));
    cap.size *= 0.6;
    const double base_top = base.pose.translation.z() + base.support(Vec3(0, 0, 1));
    cap.pose.translation = Vec3(0, 0, base_top + cap.support(Vec3(0, 0, -1)));
    parts.push_back(cap);
  }
  return parts;
}

void translate_parts(std::vector<Primitive>& parts, const Vec3& d) {
  for (Primitive& p : parts) p.pose.translation += d;
}

double parts_clearance(const std::vector<Primitive>& a,
                       const std::vector<Primitive>& b) {
  double best = std::numeric_limits<double>::infinity();
  for (const Primitive& pa : a)
    for (const Primitive& pb : b) {
      const double d = (pa.pose.translation - pb.pose.translation).norm() -
                       pa.bounding_radius() - pb.bounding_radius();
      best = std::min(best, d);
    }
  return best;
}

}  // namespace

SceneDescription generate_scene(const SceneGenConfig& config, std::uint64_t seed) {
  if (!(config.extent_min > 0.0) || config.extent_max > 1.0 ||
      config.extent_min > config.extent_max)
    throw InputError("generate_scene: extent range must lie within (0, 1]");
  if (config.n_objects < 1) throw InputError("generate_scene: n_objects must be >= 1");
  if (!config.intrinsics.is_valid()) throw InputError("generate_scene: bad intrinsics");

  Rng rng(derive_seed(seed, 0x5CE17EULL));
  SceneDescription scene;
  scene.rng_seed = seed;
  scene.target_id = 0;

  RigidTransform ground_pose;
  ground_pose.translation = Vec3(0, 0, -0.01);
  scene.structures.push_back(Primitive::box(Vec3(0.8, 0.8, 0.01), ground_pose, 1000));

  StructureLayout layout;
  if (!config.tabletop) {
    layout = build_structure(config, rng);
    for (const Primitive& p : layout.panels) scene.structures.push_back(p);
  } else {
    layout.region_half = 0.12;
  }

  const double max_gap = 1.5 * config.finger_width;
  const int shape_start = rng.uniform_int(0, 2);

  for (int i = 0; i < config.n_objects; ++i) {
    const bool is_target = (i == 0);
    const bool challenging_target =
        is_target && config.arrangement == Arrangement::Challenging &&
        !layout.panels.empty();
    bool placed = false;
    for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
      const bool compound = config.compound_objects && rng.uniform() < 0.5;
      std::vector<Primitive> parts = make_object_parts(i, shape_start + i, compound, rng);

      Vec3 offset(0, 0, 0);
      if (challenging_target) {
        const Primitive& panel =
            layout.panels[rng.uniform_index(layout.panels.size())];
        Vec3 inward = -panel.pose.translation;
        inward.z() = 0;
        if (inward.norm() < 1e-9) inward = Vec3(1, 0, 0);
        inward.normalize();
        // inner face lies toward the origin
        const Vec3 inner_face = panel.pose.translation + inward * panel.support(inward);
        const double gap = rng.uniform(0.002, std::max(0.003, max_gap - 0.002));
        double obj_reach = 0.0;
        for (const Primitive& p : parts)
          obj_reach = std::max(obj_reach, p.support(-inward));
        const Vec3 tangent(-inward.y(), inward.x(), 0.0);
        const double along_half =
            std::max(0.01, panel.support(tangent) - 0.03);
        const Vec3 center = inner_face + inward * (obj_reach + gap) +
                            tangent * rng.uniform(-along_half, along_half);
        offset = Vec3(center.x(), center.y(), 0);
      } else {
        offset = Vec3(rng.uniform(-layout.region_half, layout.region_half),
                      rng.uniform(-layout.region_half, layout.region_half), 0);
      }
      translate_parts(parts, offset);

      // settle onto the ground plane (top at z = 0)
      double low = std::numeric_limits<double>::infinity();
      for (const Primitive& p : parts)
        low = std::min(low, p.pose.translation.z() - p.support(Vec3(0, 0, -1)));
      translate_parts(parts, Vec3(0, 0, -low));

      if (overlaps(parts, scene.structures)) continue;
      bool near_other = false;
      for (const SceneObject& other : scene.objects)
        if (parts_clearance(parts, other.parts) < 0.004) { near_other = true; break; }
      if (near_other) continue;
      if (challenging_target &&
          min_surface_distance(parts, layout.panels) > max_gap)
        continue;

      scene.objects.push_back(SceneObject{i, std::move(parts)});
      placed = true;
    }
    if (!placed)
      throw GenerationError("generate_scene: placement failed after 1000 rejections");
  }
  return scene;
}

std::pair<DepthImage, MaskImage> render_depth(const SceneDescription& scene,
                                              const CameraIntrinsics& intrinsics,
                                              const RigidTransform& camera_pose,
                                              double noise_sigma,
                                              std::uint64_t noise_seed) {
  if (!intrinsics.is_valid()) throw InputError("render_depth: invalid intrinsics");

  std::vector<Primitive> prims;
  std::vector<int> labels;
  for (const Primitive& s : scene.structures) {
    prims.push_back(s);
    labels.push_back(-1);
  }
  for (const SceneObject& o : scene.objects)
    for (const Primitive& p : o.parts) {
      prims.push_back(p);
      labels.push_back(o.id);
    }

  DepthImage depth(intrinsics.width, intrinsics.height);
  MaskImage mask(intrinsics.width, intrinsics.height);
  const Vec3 origin = camera_pose.translation;

  Rng noise_rng(derive_seed(noise_seed, 0xD09EULL));
  for (int v = 0; v < intrinsics.height; ++v) {
    for (int u = 0; u < intrinsics.width; ++u) {
      const Vec3 dir_cam((u - intrinsics.cx) / intrinsics.fx,
                         (v - intrinsics.cy) / intrinsics.fy, 1.0);
      const Vec3 dir = camera_pose.rotation * dir_cam;
      const auto hit = ray_cast(prims, origin, dir);
      if (!hit) continue;
      double d = hit->t;  // dir has unit optical-axis component
      if (noise_sigma > 0.0) d = std::max(1e-6, d + noise_sigma * noise_rng.normal());
      depth.at(u, v) = d;
      mask.at(u, v) = labels[hit->prim_index];
    }
  }
  return {std::move(depth), std::move(mask)};
}

const char* to_string(StructureKind k) {
  switch (k) {
    case StructureKind::Wall: return "wall";
    case StructureKind::LargeBin: return "large_bin";
    case StructureKind::SmallBin: return "small_bin";
  }
  return "?";
}

const char* to_string(Arrangement a) {
  return a == Arrangement::Standard ? "standard" : "challenging";
}

}  // namespace carp
