#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "carp/image.hpp"

namespace carp {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

constexpr double kOrthonormalTol = 1e-9;

// SE(3) rigid transform. R maps local coordinates into the parent frame.
struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static RigidTransform identity() { return {}; }

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  Vec3 apply_inverse(const Vec3& p) const {
    return rotation.transpose() * (p - translation);
  }

  // Max deviation of R^T R from identity plus the det(R)-1 error.
  double orthonormal_drift() const;
  bool is_valid() const { return orthonormal_drift() <= kOrthonormalTol; }

  // Nearest rotation by SVD projection.
  void orthonormalize();
};

RigidTransform compose(const RigidTransform& a, const RigidTransform& b);
RigidTransform invert(const RigidTransform& t);

RigidTransform rotation_about(const Vec3& axis, double angle_rad,
                              const Vec3& translation = Vec3::Zero());

// Camera with +z forward. `pose` below always maps camera frame to world.
struct CameraIntrinsics {
  double fx = 0, fy = 0, cx = 0, cy = 0;
  int width = 0, height = 0;

  bool is_valid() const {
    return fx > 0 && fy > 0 && width > 0 && height > 0 && cx >= 0 &&
           cx < width && cy >= 0 && cy < height;
  }
};

enum class CloudRole { Scene, Target, Structure };

struct PointCloud {
  std::vector<Vec3> points;
  CloudRole role = CloudRole::Scene;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

// Binary occupancy grid expressed in `frame` (a grasp pose). Storage is
// bit-packed, linear index x-fastest: x + dx*(y + dy*z).
class VoxelGrid {
 public:
  VoxelGrid() : VoxelGrid({40, 40, 40}, 0.025) {}
  VoxelGrid(std::array<int, 3> dims, double voxel_size,
            RigidTransform frame = RigidTransform::identity());

  const std::array<int, 3>& dims() const { return dims_; }
  double voxel_size() const { return voxel_size_; }
  const RigidTransform& frame() const { return frame_; }

  std::size_t num_voxels() const {
    return static_cast<std::size_t>(dims_[0]) * dims_[1] * dims_[2];
  }

  bool in_bounds(int x, int y, int z) const {
    return x >= 0 && x < dims_[0] && y >= 0 && y < dims_[1] && z >= 0 &&
           z < dims_[2];
  }

  std::size_t linear_index(int x, int y, int z) const {
    return static_cast<std::size_t>(x) +
           static_cast<std::size_t>(dims_[0]) *
               (static_cast<std::size_t>(y) +
                static_cast<std::size_t>(dims_[1]) * static_cast<std::size_t>(z));
  }

  void set(int x, int y, int z) {
    const std::size_t i = linear_index(x, y, z);
    words_[i >> 6] |= (1ULL << (i & 63));
  }
  bool test(int x, int y, int z) const {
    const std::size_t i = linear_index(x, y, z);
    return (words_[i >> 6] >> (i & 63)) & 1ULL;
  }
  bool test_linear(std::size_t i) const {
    return (words_[i >> 6] >> (i & 63)) & 1ULL;
  }

  std::size_t count() const;

  const std::vector<std::uint64_t>& words() const { return words_; }
  std::vector<std::uint64_t>& words() { return words_; }

  // Occupancy equality; the frame is metadata and not compared.
  bool operator==(const VoxelGrid& other) const {
    return dims_ == other.dims_ && voxel_size_ == other.voxel_size_ &&
           words_ == other.words_;
  }

 private:
  std::array<int, 3> dims_;
  double voxel_size_;
  RigidTransform frame_;
  std::vector<std::uint64_t> words_;
};

PointCloud transform_cloud(const PointCloud& cloud, const RigidTransform& t);

// Pinhole back-projection of every finite positive-depth pixel. When a mask
// is given, only pixels with a non-negative label are emitted.
PointCloud back_project(const DepthImage& depth, const CameraIntrinsics& intrinsics,
                        const RigidTransform& camera_pose,
                        const MaskImage* mask = nullptr);

// Axis-aligned crop in the world frame, boundary inclusive.
PointCloud center_crop(const PointCloud& cloud, const Vec3& center,
                       double half_extent);

// Map points into `frame` and grid them: index_i = floor(q_i/voxel) + dims_i/2.
// The grasp point lands in the center voxel; out-of-range points are dropped.
VoxelGrid voxelize(const PointCloud& cloud, const RigidTransform& frame,
                   std::array<int, 3> dims = {40, 40, 40},
                   double voxel_size = 0.025);

// PCA surface normal from neighbors within `radius` of `at`, oriented toward
// `view_origin`. Throws EstimationError on <3 neighbors or a degenerate
// covariance (two near-zero eigenvalues).
Vec3 estimate_normal(const PointCloud& cloud, const Vec3& at, double radius,
                     const Vec3& view_origin);

}  // namespace carp
