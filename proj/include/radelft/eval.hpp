#ifndef RADELFT_EVAL_HPP
#define RADELFT_EVAL_HPP

#include <optional>
#include <vector>

#include "radelft/types.hpp"

namespace radelft {
namespace metrics {

struct PdPfa {
  std::optional<double> pd;  // absent when the ground truth is empty
  double pfa = 0.0;
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

// Voxelwise detection counts on a shared grid: pd = tp / (tp + fn),
// pfa = fp / (fp + tn).
PdPfa pdPfa(const OccupancyGrid& pred, const OccupancyGrid& gt);

// Symmetric Chamfer distance: mean nearest-neighbor distance s1 -> s2 plus
// mean s2 -> s1, Euclidean on (x, y, z). Either set empty is an error.
double chamfer(const PointCloud& s1, const PointCloud& s2);

// Identical value via a kd-tree index; exists for full-scale clouds.
double chamferAccel(const PointCloud& s1, const PointCloud& s2);

struct RocPoint {
  double threshold = 0.0;
  std::optional<double> pd;
  double pfa = 0.0;
  std::optional<double> chamfer_m;  // absent when either cloud is empty
};

// Operating-point sweep of a probability grid against a binary ground truth;
// detection rule is probability > threshold.
std::vector<RocPoint> rocSweep(const Tensor<double>& probabilities, const OccupancyGrid& gt,
                               const std::vector<double>& thresholds);

}  // namespace metrics
}  // namespace radelft

#endif
