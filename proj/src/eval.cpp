#include "radelft/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "radelft/errors.hpp"
#include "radelft/grid.hpp"
#include "radelft/parallel.hpp"

namespace radelft {
namespace metrics {

PdPfa pdPfa(const OccupancyGrid& pred, const OccupancyGrid& gt) {
  if (!pred.occ.sameShape(gt.occ) || !pred.grid.sameGrid(gt.grid))
    throwError(ErrorCode::ShapeMismatch, "pdPfa: grids differ");
  PdPfa out;
  const std::size_t n = pred.occ.size();
  for (std::size_t i = 0; i < n; ++i) {
    const bool p = pred.occ[i] != 0;
    const bool g = gt.occ[i] != 0;
    out.tp += p && g;
    out.fp += p && !g;
    out.fn += !p && g;
    out.tn += !p && !g;
  }
  if (out.tp + out.fn > 0)
    out.pd = static_cast<double>(out.tp) / static_cast<double>(out.tp + out.fn);
  out.pfa = out.fp + out.tn > 0
                ? static_cast<double>(out.fp) / static_cast<double>(out.fp + out.tn)
                : 0.0;
  return out;
}

namespace {

double sq(double v) { return v * v; }

double nearestBrute(const PointCloud& from, std::size_t i, const PointCloud& to) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < to.size(); ++j) {
    const double d2 = sq(from.x[i] - to.x[j]) + sq(from.y[i] - to.y[j]) + sq(from.z[i] - to.z[j]);
    best = std::min(best, d2);
  }
  return std::sqrt(best);
}

double meanNearestBrute(const PointCloud& from, const PointCloud& to) {
  std::vector<double> d(from.size());
  parallelFor(from.size(), [&](std::size_t i) { d[i] = nearestBrute(from, i, to); });
  double sum = 0.0;
  for (double v : d) sum += v;
  return sum / static_cast<double>(from.size());
}

// Balanced 3-d tree on point indices; classic median split on the widest
// spread axis.
class KdTree3 {
public:
  explicit KdTree3(const PointCloud& pc) : pc_(pc), idx_(pc.size()) {
    std::iota(idx_.begin(), idx_.end(), std::size_t{0});
    nodes_.reserve(pc.size());
    root_ = build(0, pc.size());
  }

  double nearestDistance(double x, double y, double z) const {
    double best = std::numeric_limits<double>::infinity();
    search(root_, x, y, z, best);
    return std::sqrt(best);
  }

private:
  struct Node {
    std::size_t point;
    int axis;
    int left = -1, right = -1;
  };

  double coord(std::size_t p, int axis) const {
    return axis == 0 ? pc_.x[p] : axis == 1 ? pc_.y[p] : pc_.z[p];
  }

  int build(std::size_t lo, std::size_t hi) {
    if (lo >= hi) return -1;
    double mn[3], mx[3];
    for (int a = 0; a < 3; ++a) {
      mn[a] = std::numeric_limits<double>::infinity();
      mx[a] = -mn[a];
    }
    for (std::size_t i = lo; i < hi; ++i)
      for (int a = 0; a < 3; ++a) {
        mn[a] = std::min(mn[a], coord(idx_[i], a));
        mx[a] = std::max(mx[a], coord(idx_[i], a));
      }
    int axis = 0;
    for (int a = 1; a < 3; ++a)
      if (mx[a] - mn[a] > mx[axis] - mn[axis]) axis = a;

    const std::size_t mid = lo + (hi - lo) / 2;
    std::nth_element(idx_.begin() + lo, idx_.begin() + mid, idx_.begin() + hi,
                     [&](std::size_t a, std::size_t b) {
                       const double ca = coord(a, axis), cb = coord(b, axis);
                       return ca < cb || (ca == cb && a < b);
                     });
    const int node = static_cast<int>(nodes_.size());
    nodes_.push_back(Node{idx_[mid], axis});
    const int l = build(lo, mid);
    const int r = build(mid + 1, hi);
    nodes_[node].left = l;
    nodes_[node].right = r;
    return node;
  }

  void search(int node, double x, double y, double z, double& best) const {
    if (node < 0) return;
    const Node& nd = nodes_[node];
    const std::size_t p = nd.point;
    best = std::min(best, sq(x - pc_.x[p]) + sq(y - pc_.y[p]) + sq(z - pc_.z[p]));
    const double q = nd.axis == 0 ? x : nd.axis == 1 ? y : z;
    const double c = coord(p, nd.axis);
    const int near = q < c ? nd.left : nd.right;
    const int far = q < c ? nd.right : nd.left;
    search(near, x, y, z, best);
    if (sq(q - c) < best) search(far, x, y, z, best);
  }

  const PointCloud& pc_;
  std::vector<std::size_t> idx_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

double meanNearestTree(const PointCloud& from, const KdTree3& tree) {
  std::vector<double> d(from.size());
  parallelFor(from.size(),
              [&](std::size_t i) { d[i] = tree.nearestDistance(from.x[i], from.y[i], from.z[i]); });
  double sum = 0.0;
  for (double v : d) sum += v;
  return sum / static_cast<double>(from.size());
}

void requireNonEmpty(const PointCloud& s1, const PointCloud& s2) {
  if (s1.size() == 0 || s2.size() == 0)
    throwError(ErrorCode::EmptySet, "chamfer: point sets must be non-empty");
}

}  // namespace

double chamfer(const PointCloud& s1, const PointCloud& s2) {
  requireNonEmpty(s1, s2);
  return meanNearestBrute(s1, s2) + meanNearestBrute(s2, s1);
}

double chamferAccel(const PointCloud& s1, const PointCloud& s2) {
  requireNonEmpty(s1, s2);
  const KdTree3 t2(s2);
  const KdTree3 t1(s1);
  return meanNearestTree(s1, t2) + meanNearestTree(s2, t1);
}

std::vector<RocPoint> rocSweep(const Tensor<double>& probabilities, const OccupancyGrid& gt,
                               const std::vector<double>& thresholds) {
  if (!probabilities.sameShape(gt.occ))
    throwError(ErrorCode::ShapeMismatch, "rocSweep: probability grid shape differs from truth");

  PointCloud gt_cloud = gridToPointCloud(gt);
  std::vector<RocPoint> out;
  out.reserve(thresholds.size());
  for (double thr : thresholds) {
    OccupancyGrid pred = OccupancyGrid::zeros(gt.grid);
    for (std::size_t i = 0; i < probabilities.size(); ++i)
      pred.occ[i] = probabilities[i] > thr ? 1 : 0;
    RocPoint pt;
    pt.threshold = thr;
    const PdPfa m = pdPfa(pred, gt);
    pt.pd = m.pd;
    pt.pfa = m.pfa;
    const PointCloud pc = gridToPointCloud(pred);
    if (pc.size() > 0 && gt_cloud.size() > 0) pt.chamfer_m = chamferAccel(pc, gt_cloud);
    out.push_back(pt);
  }
  return out;
}

}  // namespace metrics
}  // namespace radelft
