#include "radelft/grid.hpp"

#include <cmath>

#include "radelft/errors.hpp"

namespace radelft {

PointCloud gridToPointCloud(const OccupancyGrid& grid, const RadarCube* cube) {
  const PolarGrid& g = grid.grid;
  const std::size_t nr = g.numRange(), na = g.numAzimuth(), ne = g.numElevation();
  if (grid.occ.rank() != 3 || grid.occ.dim(0) != nr || grid.occ.dim(1) != na ||
      grid.occ.dim(2) != ne)
    throwError(ErrorCode::ShapeMismatch, "gridToPointCloud: occupancy shape does not match grid");
  if (cube && !cube->grid.sameGrid(g))
    throwError(ErrorCode::ShapeMismatch, "gridToPointCloud: cube grid does not match occupancy grid");

  PointCloud pc;
  const std::size_t nd = cube ? cube->grid.numDoppler() : 0;
  for (std::size_t r = 0; r < nr; ++r) {
    const double range = g.rangeCenter(r);
    for (std::size_t a = 0; a < na; ++a) {
      const double u = g.az_sin_centers[a];
      // Doppler/power of the strongest Doppler bin at this (r, a), shared by
      // every elevation bin of the cell.
      double dop = 0.0, pdb = 0.0;
      bool cell_has_point = false;
      for (std::size_t e = 0; e < ne; ++e) cell_has_point |= grid.occ(r, a, e) != 0;
      if (!cell_has_point) continue;
      if (cube) {
        std::size_t best = 0;
        double best_p = cube->power(r, 0, a);
        for (std::size_t d = 1; d < nd; ++d)
          if (cube->power(r, d, a) > best_p) {  // ties keep the lowest index
            best_p = cube->power(r, d, a);
            best = d;
          }
        dop = g.doppler_centers[best];
        pdb = 10.0 * std::log10(std::max(best_p, 1e-300));
      }
      for (std::size_t e = 0; e < ne; ++e) {
        if (!grid.occ(r, a, e)) continue;
        const double w = g.el_sin_centers[e];
        const double y2 = std::max(0.0, 1.0 - u * u - w * w);
        pc.append(range * u, range * std::sqrt(y2), range * w);
        if (cube) {
          pc.doppler.push_back(dop);
          pc.power_db.push_back(pdb);
        }
      }
    }
  }
  return pc;
}

std::optional<VoxelIndex> voxelIndexOf(double x, double y, double z, const PolarGrid& grid) {
  if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z))
    throwError(ErrorCode::InvalidArgument, "voxelIndexOf: point must be finite");
  const double range = std::sqrt(x * x + y * y + z * z);
  if (!(range > 0.0) || y <= 0.0) return std::nullopt;  // behind or at the sensor
  const double u = x / range;
  const double w = z / range;

  const double dr = grid.rangeStep();
  const long long rb = std::llround(range / dr);
  if (rb < 0 || rb >= static_cast<long long>(grid.numRange())) return std::nullopt;

  const double dua = grid.azSinStep();
  const long long ab = std::llround((u - grid.az_sin_centers.front()) / dua);
  if (ab < 0 || ab >= static_cast<long long>(grid.numAzimuth())) return std::nullopt;

  long long eb = 0;
  if (grid.numElevation() > 1) {
    const double due = grid.elSinStep();
    eb = std::llround((w - grid.el_sin_centers.front()) / due);
    if (eb < 0 || eb >= static_cast<long long>(grid.numElevation())) return std::nullopt;
  }
  return VoxelIndex{static_cast<std::size_t>(rb), static_cast<std::size_t>(ab),
                    static_cast<std::size_t>(eb)};
}

}  // namespace radelft
