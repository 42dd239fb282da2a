#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "radelft/errors.hpp"
#include "radelft/eval.hpp"
#include "radelft/grid.hpp"

using namespace radelft;
using namespace radelft::metrics;

namespace {

PointCloud randomCloud(std::mt19937_64& rng, std::size_t n, double extent = 20.0) {
  std::uniform_real_distribution<double> uni(-extent, extent);
  PointCloud pc;
  for (std::size_t i = 0; i < n; ++i) pc.append(uni(rng), uni(rng), uni(rng));
  return pc;
}

PolarGrid flatGrid() { return PolarGrid::fromSteps(0.5, 32, 0.5, 2, 32, 1, 70.0, 20.0); }

}  // namespace

TEST_CASE("pdPfa basics") {
  const PolarGrid g = flatGrid();

  SUBCASE("pred == gt gives pd 1, pfa 0") {
    OccupancyGrid a = OccupancyGrid::zeros(g);
    a.occ(3, 4, 0) = 1;
    a.occ(5, 6, 0) = 1;
    const PdPfa m = pdPfa(a, a);
    REQUIRE(m.pd.has_value());
    CHECK(*m.pd == 1.0);
    CHECK(m.pfa == 0.0);
  }

  SUBCASE("all-ones prediction gives pd 1, pfa 1") {
    OccupancyGrid gt = OccupancyGrid::zeros(g);
    gt.occ(3, 4, 0) = 1;
    OccupancyGrid pred = OccupancyGrid::zeros(g);
    pred.occ.fill(1);
    const PdPfa m = pdPfa(pred, gt);
    CHECK(*m.pd == 1.0);
    CHECK(m.pfa == 1.0);
  }

  SUBCASE("one-cell shift on a 2x2x1 grid: pd 0, pfa 1/3") {
    const PolarGrid tiny = PolarGrid::fromSteps(0.5, 2, 0.5, 2, 4, 1, 70.0, 20.0);
    REQUIRE(tiny.numRange() == 2);
    REQUIRE(tiny.numAzimuth() == 2);
    OccupancyGrid gt = OccupancyGrid::zeros(tiny);
    gt.occ(0, 0, 0) = 1;
    OccupancyGrid pred = OccupancyGrid::zeros(tiny);
    pred.occ(1, 0, 0) = 1;
    const PdPfa m = pdPfa(pred, gt);
    CHECK(*m.pd == 0.0);
    CHECK(m.pfa == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(m.tp == 0);
    CHECK(m.fp == 1);
    CHECK(m.fn == 1);
    CHECK(m.tn == 2);
  }

  SUBCASE("empty ground truth leaves pd absent") {
    OccupancyGrid gt = OccupancyGrid::zeros(g);
    OccupancyGrid pred = OccupancyGrid::zeros(g);
    pred.occ(1, 1, 0) = 1;
    const PdPfa m = pdPfa(pred, gt);
    CHECK(!m.pd.has_value());
    CHECK(m.pfa > 0.0);
  }
}

TEST_CASE("chamfer hand values") {
  PointCloud a, b;
  a.append(0, 0, 0);
  b.append(1, 0, 0);

  SUBCASE("identical sets give zero") { CHECK(chamfer(a, a) == 0.0); }

  SUBCASE("single pair gives 2.0") { CHECK(chamfer(a, b) == doctest::Approx(2.0).epsilon(1e-12)); }

  SUBCASE("two-vs-one hand evaluation gives 2.0") {
    PointCloud s1;
    s1.append(0, 0, 0);
    s1.append(2, 0, 0);
    CHECK(chamfer(s1, b) == doctest::Approx(2.0).epsilon(1e-12));
  }

  SUBCASE("empty sets are an error") {
    PointCloud empty;
    CHECK_THROWS_AS(chamfer(empty, b), Error);
    CHECK_THROWS_AS(chamfer(a, empty), Error);
    CHECK_THROWS_AS(chamferAccel(empty, b), Error);
  }
}

TEST_CASE("chamfer properties: symmetry, translation invariance, zero iff equal") {
  std::mt19937_64 rng(17);
  const PointCloud a = randomCloud(rng, 120);
  const PointCloud b = randomCloud(rng, 80);

  CHECK(chamfer(a, b) == chamfer(b, a));
  CHECK(chamferAccel(a, b) == chamferAccel(b, a));

  PointCloud at = a, bt = b;
  const double tx = 3.25, ty = -1.5, tz = 0.75;
  for (std::size_t i = 0; i < at.size(); ++i) {
    at.x[i] += tx;
    at.y[i] += ty;
    at.z[i] += tz;
  }
  for (std::size_t i = 0; i < bt.size(); ++i) {
    bt.x[i] += tx;
    bt.y[i] += ty;
    bt.z[i] += tz;
  }
  CHECK(std::abs(chamfer(at, bt) - chamfer(a, b)) < 1e-12);

  // Equal as sets (different order) -> zero; any extra point -> positive.
  PointCloud shuffled;
  for (std::size_t i = a.size(); i-- > 0;) shuffled.append(a.x[i], a.y[i], a.z[i]);
  CHECK(chamfer(a, shuffled) == 0.0);
  PointCloud extra = a;
  extra.append(100.0, 100.0, 100.0);
  CHECK(chamfer(a, extra) > 0.0);
}

TEST_CASE("accelerated chamfer equals brute force over random pairs") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 25; ++trial) {
    const PointCloud a = randomCloud(rng, 50 + rng() % 250);
    const PointCloud b = randomCloud(rng, 50 + rng() % 250);
    CHECK(std::abs(chamferAccel(a, b) - chamfer(a, b)) < 1e-9);
  }
  const PointCloud a = randomCloud(rng, 200);
  CHECK(chamferAccel(a, a) == 0.0);
}

TEST_CASE("equal-false-alarm fixtures: chamfer separates ghost, shift, overestimate") {
  // Ground truth is one thin row of cells; the three predictions carry the
  // same number of false alarms and hence the same pfa, but very different
  // spatial quality.
  const PolarGrid g = flatGrid();
  const std::size_t row = 10, a_lo = 8, n_cells = 16;

  OccupancyGrid gt = OccupancyGrid::zeros(g);
  for (std::size_t a = a_lo; a < a_lo + n_cells; ++a) gt.occ(row, a, 0) = 1;

  OccupancyGrid ghost = gt;  // truth plus a distant ghost cluster
  for (std::size_t a = a_lo; a < a_lo + n_cells; ++a) ghost.occ(30, a, 0) = 1;

  OccupancyGrid shift = OccupancyGrid::zeros(g);  // everything one range cell off
  for (std::size_t a = a_lo; a < a_lo + n_cells; ++a) shift.occ(row + 1, a, 0) = 1;

  OccupancyGrid over = gt;  // truth plus an adjacent dilation ring
  for (std::size_t a = a_lo; a < a_lo + n_cells; ++a) over.occ(row + 1, a, 0) = 1;

  const PdPfa m_ghost = pdPfa(ghost, gt);
  const PdPfa m_shift = pdPfa(shift, gt);
  const PdPfa m_over = pdPfa(over, gt);
  CHECK(m_ghost.fp == n_cells);
  CHECK(m_shift.fp == n_cells);
  CHECK(m_over.fp == n_cells);
  CHECK(m_ghost.pfa == m_shift.pfa);
  CHECK(m_shift.pfa == m_over.pfa);

  const PointCloud gt_pc = gridToPointCloud(gt);
  const double cd_ghost = chamfer(gridToPointCloud(ghost), gt_pc);
  const double cd_shift = chamfer(gridToPointCloud(shift), gt_pc);
  const double cd_over = chamfer(gridToPointCloud(over), gt_pc);
  CHECK(cd_ghost > cd_shift);
  CHECK(cd_shift >= cd_over);
}

TEST_CASE("rocSweep endpoints and monotonicity") {
  const PolarGrid g = flatGrid();
  OccupancyGrid gt = OccupancyGrid::zeros(g);
  gt.occ(4, 4, 0) = 1;
  gt.occ(4, 5, 0) = 1;

  SUBCASE("thresholds 0 and 1 hit (1,1) and (0,0) for interior probabilities") {
    Tensor<double> probs(gt.occ.shape());
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> uni(0.05, 0.95);
    for (auto& p : probs) p = uni(rng);
    const auto pts = rocSweep(probs, gt, {0.0, 1.0});
    REQUIRE(pts.size() == 2);
    CHECK(*pts[0].pd == 1.0);
    CHECK(pts[0].pfa == 1.0);
    CHECK(*pts[1].pd == 0.0);
    CHECK(pts[1].pfa == 0.0);
  }

  SUBCASE("pd and pfa are non-increasing in the threshold") {
    Tensor<double> probs(gt.occ.shape());
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (auto& p : probs) p = uni(rng);
    std::vector<double> thresholds;
    for (int i = 0; i <= 20; ++i) thresholds.push_back(i / 20.0);
    const auto pts = rocSweep(probs, gt, thresholds);
    for (std::size_t i = 1; i < pts.size(); ++i) {
      if (pts[i].pd && pts[i - 1].pd) CHECK(*pts[i].pd <= *pts[i - 1].pd);
      CHECK(pts[i].pfa <= pts[i - 1].pfa);
    }
  }

  SUBCASE("perfect probabilities give pd 1, pfa 0 at any interior threshold") {
    Tensor<double> probs(gt.occ.shape());
    for (std::size_t i = 0; i < probs.size(); ++i) probs[i] = gt.occ[i] ? 1.0 : 0.0;
    for (double thr : {0.1, 0.5, 0.9}) {
      const auto pts = rocSweep(probs, gt, {thr});
      CHECK(*pts[0].pd == 1.0);
      CHECK(pts[0].pfa == 0.0);
    }
  }
}
