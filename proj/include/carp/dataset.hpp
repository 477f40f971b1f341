#pragma once

#include <cstdint>

#include "carp/geometry.hpp"

namespace carp {

enum class DatasetKind : std::uint8_t { Collision = 0, Stability = 1 };

// One self-supervised training example: a grasp-frame occupancy grid and
// its oracle label (1 = collision-free / stable). scene_seed and
// candidate_index let the grid be re-derived bit-exactly.
struct LabeledSample {
  VoxelGrid grid;
  std::uint8_t label = 0;
  DatasetKind kind = DatasetKind::Collision;
  std::uint64_t scene_seed = 0;
  std::uint32_t candidate_index = 0;
};

}  // namespace carp
