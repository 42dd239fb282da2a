#include "radelft/groundtruth.hpp"

#include <cmath>
#include <random>

#include "radelft/errors.hpp"
#include "radelft/grid.hpp"
#include "radelft/rng.hpp"

namespace radelft {
namespace gt {

namespace {

PointCloud selectPoints(const PointCloud& pc, const std::vector<char>& keep) {
  PointCloud out;
  for (std::size_t i = 0; i < pc.size(); ++i) {
    if (!keep[i]) continue;
    out.append(pc.x[i], pc.y[i], pc.z[i]);
    if (!pc.doppler.empty()) out.doppler.push_back(pc.doppler[i]);
    if (!pc.power_db.empty()) out.power_db.push_back(pc.power_db[i]);
  }
  return out;
}

}  // namespace

PointCloud cropFov(const PointCloud& pc, const PolarGrid& grid, double r_max) {
  const double az_max = grid.az_fov_deg * M_PI / 180.0;
  const double el_max = grid.el_fov_deg * M_PI / 180.0;
  std::vector<char> keep(pc.size(), 0);
  for (std::size_t i = 0; i < pc.size(); ++i) {
    const double r = std::sqrt(pc.x[i] * pc.x[i] + pc.y[i] * pc.y[i] + pc.z[i] * pc.z[i]);
    if (!(r > 0.0) || r > r_max) continue;
    const double az = std::atan2(pc.x[i], pc.y[i]);
    const double el = std::asin(std::clamp(pc.z[i] / r, -1.0, 1.0));
    if (std::abs(az) <= az_max && std::abs(el) <= el_max) keep[i] = 1;
  }
  return selectPoints(pc, keep);
}

GroundRemovalResult removeGround(const PointCloud& pc, const GroundRemovalParams& params) {
  GroundRemovalResult res;
  res.cloud = pc;
  const std::size_t n = pc.size();
  if (n < 3) return res;

  const double cos_max_tilt = std::cos(params.max_tilt_deg * M_PI / 180.0);
  std::mt19937_64 rng = makeRng(params.seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);

  double best_n[3] = {0, 0, 1}, best_d = 0.0;
  std::size_t best_count = 0;

  for (int it = 0; it < params.ransac_iters; ++it) {
    const std::size_t i = pick(rng), j = pick(rng), k = pick(rng);
    if (i == j || j == k || i == k) continue;
    const double ux = pc.x[j] - pc.x[i], uy = pc.y[j] - pc.y[i], uz = pc.z[j] - pc.z[i];
    const double vx = pc.x[k] - pc.x[i], vy = pc.y[k] - pc.y[i], vz = pc.z[k] - pc.z[i];
    double nx = uy * vz - uz * vy;
    double ny = uz * vx - ux * vz;
    double nz = ux * vy - uy * vx;
    const double len = std::sqrt(nx * nx + ny * ny + nz * nz);
    if (len < 1e-12) continue;
    nx /= len;
    ny /= len;
    nz /= len;
    if (nz < 0.0) {
      nx = -nx;
      ny = -ny;
      nz = -nz;
    }
    if (nz < cos_max_tilt) continue;  // not near-horizontal
    const double d = nx * pc.x[i] + ny * pc.y[i] + nz * pc.z[i];
    std::size_t count = 0;
    for (std::size_t p = 0; p < n; ++p)
      if (std::abs(nx * pc.x[p] + ny * pc.y[p] + nz * pc.z[p] - d) <= params.inlier_dist_m)
        ++count;
    if (count > best_count) {
      best_count = count;
      best_n[0] = nx;
      best_n[1] = ny;
      best_n[2] = nz;
      best_d = d;
    }
  }

  if (best_count < std::max<std::size_t>(params.min_inliers, 3)) return res;

  std::vector<char> keep(n, 0);
  for (std::size_t p = 0; p < n; ++p)
    keep[p] = std::abs(best_n[0] * pc.x[p] + best_n[1] * pc.y[p] + best_n[2] * pc.z[p] -
                       best_d) > params.inlier_dist_m;
  res.cloud = selectPoints(pc, keep);
  res.plane_found = true;
  res.plane_z = best_d / best_n[2];
  return res;
}

OccupancyGrid voxelize(const PointCloud& pc, const PolarGrid& grid) {
  OccupancyGrid out = OccupancyGrid::zeros(grid);
  for (std::size_t i = 0; i < pc.size(); ++i) {
    const auto idx = voxelIndexOf(pc.x[i], pc.y[i], pc.z[i], grid);
    if (idx) out.occ(idx->r, idx->a, idx->e) = 1;
  }
  return out;
}

OccupancyGrid buildSupervision(const PointCloud& pc, const PolarGrid& grid, double r_max,
                               const GroundRemovalParams& params) {
  return voxelize(supervisionCloud(pc, grid, r_max, params), grid);
}

PointCloud supervisionCloud(const PointCloud& pc, const PolarGrid& grid, double r_max,
                            const GroundRemovalParams& params) {
  PointCloud cropped = cropFov(pc, grid, r_max);
  if (cropped.size() < 3) return cropped;
  return removeGround(cropped, params).cloud;
}

}  // namespace gt
}  // namespace radelft
