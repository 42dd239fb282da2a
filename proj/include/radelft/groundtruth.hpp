#ifndef RADELFT_GROUNDTRUTH_HPP
#define RADELFT_GROUNDTRUTH_HPP

#include <cstdint>

#include "radelft/types.hpp"

namespace radelft {
namespace gt {

struct GroundRemovalParams {
  int ransac_iters = 128;
  double inlier_dist_m = 0.1;
  double max_tilt_deg = 10.0;
  std::size_t min_inliers = 20;  // below this no plane is accepted
  std::uint64_t seed = 7;
};

struct GroundRemovalResult {
  PointCloud cloud;
  bool plane_found = false;
  double plane_z = 0.0;  // plane height at the origin, valid when found
};

// Keeps points with range <= r_max, |azimuth| <= grid az FoV and
// |elevation| <= grid el FoV.
PointCloud cropFov(const PointCloud& pc, const PolarGrid& grid, double r_max);

// Dominant near-horizontal plane by repeated random 3-point hypotheses;
// inliers removed. When no acceptable plane exists the input is returned
// unchanged with plane_found == false.
GroundRemovalResult removeGround(const PointCloud& pc, const GroundRemovalParams& params);

// occ[v] = 1 iff at least one point falls in voxel v; out-of-FoV points are
// ignored.
OccupancyGrid voxelize(const PointCloud& pc, const PolarGrid& grid);

// cropFov -> removeGround -> voxelize. Cacheable offline, outside any
// training loop.
OccupancyGrid buildSupervision(const PointCloud& pc, const PolarGrid& grid, double r_max,
                               const GroundRemovalParams& params);

// The intermediate cloud of buildSupervision (after crop + ground removal);
// the evaluation suite compares detector point clouds against it.
PointCloud supervisionCloud(const PointCloud& pc, const PolarGrid& grid, double r_max,
                            const GroundRemovalParams& params);

}  // namespace gt
}  // namespace radelft

#endif
