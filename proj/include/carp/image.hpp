#pragma once

#include <cstdint>
#include <limits>
#include <vector>

namespace carp {

// Row-major depth map in meters. Pixels with no surface hit carry +inf.
struct DepthImage {
  int width = 0;
  int height = 0;
  std::vector<double> depth;  // width * height, row-major

  DepthImage() = default;
  DepthImage(int w, int h)
      : width(w), height(h),
        depth(static_cast<std::size_t>(w) * h,
              std::numeric_limits<double>::infinity()) {}

  double& at(int u, int v) { return depth[static_cast<std::size_t>(v) * width + u]; }
  double at(int u, int v) const { return depth[static_cast<std::size_t>(v) * width + u]; }
};

// Instance labels paired with a DepthImage. -1 marks background and
// surrounding structure; non-negative values are object ids.
struct MaskImage {
  int width = 0;
  int height = 0;
  std::vector<std::int32_t> labels;

  MaskImage() = default;
  MaskImage(int w, int h)
      : width(w), height(h), labels(static_cast<std::size_t>(w) * h, -1) {}

  std::int32_t& at(int u, int v) { return labels[static_cast<std::size_t>(v) * width + u]; }
  std::int32_t at(int u, int v) const { return labels[static_cast<std::size_t>(v) * width + u]; }
};

}  // namespace carp
