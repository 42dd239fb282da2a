#ifndef RADELFT_GRID_HPP
#define RADELFT_GRID_HPP

#include <optional>

#include "radelft/types.hpp"

namespace radelft {

struct VoxelIndex {
  std::size_t r = 0;
  std::size_t a = 0;
  std::size_t e = 0;
  bool operator==(const VoxelIndex&) const = default;
};

// One point per occupied voxel, placed at the voxel center. When a cube is
// supplied, each point carries the power (dB) and Doppler of the
// maximum-power Doppler bin at its (r, a) cell, giving 5 features per point.
PointCloud gridToPointCloud(const OccupancyGrid& occ, const RadarCube* cube = nullptr);

// Inverse of the voxel-center placement: bin containing the point's
// (range, sin az, sin el). Points beyond the crop limits yield nullopt
// (out of field of view), which is a value, not an error.
std::optional<VoxelIndex> voxelIndexOf(double x, double y, double z, const PolarGrid& grid);

}  // namespace radelft

#endif
