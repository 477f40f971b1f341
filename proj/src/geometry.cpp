#include "carp/geometry.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>

#include "carp/errors.hpp"

namespace carp {

double RigidTransform::orthonormal_drift() const {
  const Mat3 err = rotation.transpose() * rotation - Mat3::Identity();
  return err.cwiseAbs().maxCoeff() + std::abs(rotation.determinant() - 1.0);
}

void RigidTransform::orthonormalize() {
  Eigen::JacobiSVD<Mat3> svd(rotation, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0) {
    Mat3 flip = Mat3::Identity();
    flip(2, 2) = -1.0;
    r = svd.matrixU() * flip * svd.matrixV().transpose();
  }
  rotation = r;
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  RigidTransform out;
  out.rotation = a.rotation * b.rotation;
  out.translation = a.rotation * b.translation + a.translation;
  if (out.orthonormal_drift() > kOrthonormalTol) out.orthonormalize();
  return out;
}

RigidTransform invert(const RigidTransform& t) {
  RigidTransform out;
  out.rotation = t.rotation.transpose();
  out.translation = -(out.rotation * t.translation);
  return out;
}

RigidTransform rotation_about(const Vec3& axis, double angle_rad,
                              const Vec3& translation) {
  RigidTransform out;
  out.rotation = Eigen::AngleAxisd(angle_rad, axis.normalized()).toRotationMatrix();
  out.translation = translation;
  return out;
}

VoxelGrid::VoxelGrid(std::array<int, 3> dims, double voxel_size,
                     RigidTransform frame)
    : dims_(dims), voxel_size_(voxel_size), frame_(std::move(frame)) {
  if (dims_[0] <= 0 || dims_[1] <= 0 || dims_[2] <= 0)
    throw InputError("VoxelGrid: dims must be positive");
  if (!(voxel_size_ > 0.0)) throw InputError("VoxelGrid: voxel_size must be > 0");
  words_.assign((num_voxels() + 63) / 64, 0ULL);
}

std::size_t VoxelGrid::count() const {
  std::size_t n = 0;
  for (std::uint64_t w : words_) n += static_cast<std::size_t>(__builtin_popcountll(w));
  return n;
}

PointCloud transform_cloud(const PointCloud& cloud, const RigidTransform& t) {
  PointCloud out;
  out.role = cloud.role;
  out.points.reserve(cloud.points.size());
  for (const Vec3& p : cloud.points) out.points.push_back(t.apply(p));
  return out;
}

PointCloud back_project(const DepthImage& depth, const CameraIntrinsics& intrinsics,
                        const RigidTransform& camera_pose, const MaskImage* mask) {
  if (!intrinsics.is_valid()) throw InputError("back_project: invalid intrinsics");
  if (depth.width != intrinsics.width || depth.height != intrinsics.height)
    throw InputError("back_project: depth dimensions do not match intrinsics");
  if (mask && (mask->width != depth.width || mask->height != depth.height))
    throw InputError("back_project: mask dimensions do not match depth");

  PointCloud out;
  for (int v = 0; v < depth.height; ++v) {
    for (int u = 0; u < depth.width; ++u) {
      const double d = depth.at(u, v);
      if (!std::isfinite(d) || d <= 0.0) continue;
      if (mask && mask->at(u, v) < 0) continue;
      const Vec3 cam((u - intrinsics.cx) * d / intrinsics.fx,
                     (v - intrinsics.cy) * d / intrinsics.fy, d);
      out.points.push_back(camera_pose.apply(cam));
    }
  }
  return out;
}

PointCloud center_crop(const PointCloud& cloud, const Vec3& center,
                       double half_extent) {
  if (!(half_extent > 0.0)) throw InputError("center_crop: half_extent must be > 0");
  PointCloud out;
  out.role = cloud.role;
  for (const Vec3& p : cloud.points) {
    const Vec3 d = (p - center).cwiseAbs();
    if (d.x() <= half_extent && d.y() <= half_extent && d.z() <= half_extent)
      out.points.push_back(p);
  }
  return out;
}

VoxelGrid voxelize(const PointCloud& cloud, const RigidTransform& frame,
                   std::array<int, 3> dims, double voxel_size) {
  VoxelGrid grid(dims, voxel_size, frame);
  const Mat3 rt = frame.rotation.transpose();
  const Vec3 t = frame.translation;
  for (const Vec3& p : cloud.points) {
    const Vec3 q = rt * (p - t);
    const int x = static_cast<int>(std::floor(q.x() / voxel_size)) + dims[0] / 2;
    const int y = static_cast<int>(std::floor(q.y() / voxel_size)) + dims[1] / 2;
    const int z = static_cast<int>(std::floor(q.z() / voxel_size)) + dims[2] / 2;
    if (grid.in_bounds(x, y, z)) grid.set(x, y, z);
  }
  return grid;
}

Vec3 estimate_normal(const PointCloud& cloud, const Vec3& at, double radius,
                     const Vec3& view_origin) {
  if (!(radius > 0.0)) throw InputError("estimate_normal: radius must be > 0");

  Vec3 mean = Vec3::Zero();
  std::vector<const Vec3*> neighbors;
  const double r2 = radius * radius;
  for (const Vec3& p : cloud.points) {
    if ((p - at).squaredNorm() <= r2) {
      neighbors.push_back(&p);
      mean += p;
    }
  }
  if (neighbors.size() < 3)
    throw EstimationError("estimate_normal: fewer than 3 neighbors in radius");
  mean /= static_cast<double>(neighbors.size());

  Mat3 cov = Mat3::Zero();
  for (const Vec3* p : neighbors) {
    const Vec3 d = *p - mean;
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(neighbors.size());

  Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
  const Vec3 evals = eig.eigenvalues();  // ascending
  // Collinear neighborhood: two vanishing eigenvalues relative to the spread.
  const double scale = evals(2);
  if (scale <= 0.0 || evals(1) < 1e-9 * scale)
    throw EstimationError("estimate_normal: degenerate neighborhood covariance");

  Vec3 n = eig.eigenvectors().col(0).normalized();
  if (n.dot(view_origin - at) < 0.0) n = -n;
  return n;
}

}  // namespace carp
