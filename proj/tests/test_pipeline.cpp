#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "radelft/config.hpp"
#include "radelft/errors.hpp"
#include "radelft/fft.hpp"
#include "radelft/pipeline.hpp"
#include "radelft/simulate.hpp"

using namespace radelft;
using namespace radelft::pipe;

namespace {

Scene bareScene(std::vector<Scatterer> scatterers, std::uint64_t seed = 1) {
  Scene s;
  s.scatterers = std::move(scatterers);
  s.ground_density = 0.0;
  s.rng_seed = seed;
  return s;
}

Scatterer radialTarget(double range, double v, double u = 0.0) {
  Scatterer sc;
  const double x = u * range;
  const double y = std::sqrt(range * range - x * x);
  sc.position = {x, y, 0.0};
  sc.velocity = {v * x / range, v * y / range, 0.0};
  sc.rcs_amplitude = 5.0;
  return sc;
}

struct Cell {
  std::size_t r, d;
};

Cell strongestCell(const Tensor<Cplx>& rd) {
  Cell best{0, 0};
  double bp = -1.0;
  for (std::size_t r = 0; r < rd.dim(0); ++r)
    for (std::size_t d = 0; d < rd.dim(1); ++d) {
      double p = 0.0;
      for (std::size_t c = 0; c < rd.dim(2); ++c) p += std::norm(rd(r, d, c));
      if (p > bp) {
        bp = p;
        best = {r, d};
      }
    }
  return best;
}

std::size_t azPeak(const Tensor<double>& spec) {
  std::size_t best = 0;
  double bp = -1.0;
  for (std::size_t a = 0; a < spec.dim(0); ++a) {
    double m = 0.0;
    for (std::size_t e = 0; e < spec.dim(1); ++e) m = std::max(m, spec(a, e));
    if (m > bp) {
      bp = m;
      best = a;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("range-Doppler map: static boresight scatterer at 10 m") {
  // Single channel, no zero padding: 10 m falls on bin round(10 / 0.2) = 50.
  const WaveformConfig cfg = WaveformConfig::make(76e9, 35e12, 28e-6, 5e-6, 256, 8, 12e6, 1, 1);
  const PolarGrid grid = PolarGrid::make(cfg, 1, 256, 16, 1, 70.0, 20.0);
  const ArrayGeometry geom = ArrayGeometry::fromElements({{0, 0}}, {{0, 0}});
  const AdcFrame f =
      sim::synthesizeAdc(bareScene({radialTarget(10.0, 0.0)}), cfg, geom, 0.0, 0);
  const auto rd = rangeDopplerMap(f, cfg, grid);
  const Cell c = strongestCell(rd);
  CHECK(c.r == 50);
  CHECK(c.d == grid.numDoppler() / 2);  // zero Doppler at the center bin
}

TEST_CASE("range-Doppler map of an all-zero frame is all zero") {
  const WaveformConfig cfg = WaveformConfig::make(76e9, 35e12, 28e-6, 5e-6, 32, 8, 12e6, 3, 4);
  const PolarGrid grid = PolarGrid::make(cfg, 2, 64, 16, 8, 70.0, 20.0);
  const AdcFrame f = sim::synthesizeAdc(bareScene({}), cfg, ArrayGeometry::mini(), 0.0, 0);
  const auto rd = rangeDopplerMap(f, cfg, grid);
  for (const auto& v : rd) CHECK(v == Cplx{0.0, 0.0});
}

TEST_CASE("Doppler bin offset equals round(v / v_res)") {
  const ConfigBundle cb = ConfigBundle::deskDefault();
  const PolarGrid grid = cb.makeGrid();
  const DerivedQuantities der = derivedQuantities(cb.waveform);
  const double v = 1.0;
  const AdcFrame f = sim::synthesizeAdc(bareScene({radialTarget(15.0, v)}), cb.waveform,
                                        cb.array, 0.0, 0);
  const auto rd = rangeDopplerMap(f, cb.waveform, grid);
  const Cell c = strongestCell(rd);
  const long long offset =
      static_cast<long long>(c.d) - static_cast<long long>(grid.numDoppler() / 2);
  CHECK(offset == std::llround(v / der.v_res_mps));
}

TEST_CASE("Parseval: map power equals windowed input power times the FFT sizes") {
  const ConfigBundle cb = ConfigBundle::deskDefault();
  const PolarGrid grid = cb.makeGrid();  // keeps all 128 range bins
  Scene scene = bareScene({radialTarget(12.0, 2.0), radialTarget(30.0, -1.0, 0.3)}, 4);
  const AdcFrame f = sim::synthesizeAdc(scene, cb.waveform, cb.array, 1.0, 0);
  const auto rd = rangeDopplerMap(f, cb.waveform, grid);

  const auto wf = hammingWindow(f.numFast());
  const auto ws = hammingWindow(f.numSlow());
  double in_power = 0.0;
  for (std::size_t n = 0; n < f.numFast(); ++n)
    for (std::size_t s = 0; s < f.numSlow(); ++s)
      for (std::size_t ch = 0; ch < f.numChannels(); ++ch)
        in_power += std::norm(f.data(n, s, ch) * wf[n] * ws[s]);

  double out_power = 0.0;
  for (const auto& v : rd) out_power += std::norm(v);

  const double range_fft = 2.0 * f.numFast();
  CHECK(out_power ==
        doctest::Approx(in_power * range_fft * f.numSlow()).epsilon(1e-6));
}

TEST_CASE("shape mismatch between frame and waveform is an error") {
  const WaveformConfig cfg = WaveformConfig::make(76e9, 35e12, 28e-6, 5e-6, 32, 8, 12e6, 3, 4);
  const WaveformConfig other = WaveformConfig::make(76e9, 35e12, 28e-6, 5e-6, 64, 8, 12e6, 3, 4);
  const PolarGrid grid = PolarGrid::make(cfg, 2, 64, 16, 8, 70.0, 20.0);
  const AdcFrame f = sim::synthesizeAdc(bareScene({}), cfg, ArrayGeometry::mini(), 0.0, 0);
  CHECK_THROWS_AS(rangeDopplerMap(f, other, grid), Error);
}

TEST_CASE("TDMA phase step: frozen value 0.2101 rad for v=2, dt=33us, lambda=3.947mm") {
  // Waveform tuned so the carrier wavelength is exactly 3.947 mm.
  const double lambda = 3.947e-3;
  const double fc = kSpeedOfLight / lambda;
  WaveformConfig cfg = WaveformConfig::make(fc, 35e12, 28e-6, 5e-6, 64, 32, 12e6, 5, 8);
  cfg.f_start_hz = fc - cfg.bandwidth_eff_hz / 2.0;
  CHECK(cfg.lambda() == doctest::Approx(lambda).epsilon(1e-12));

  const double step = tdmaPhaseStep(cfg, 2.0);
  CHECK(step == doctest::Approx(4.0 * M_PI * 2.0 * 33e-6 / lambda).epsilon(1e-12));
  CHECK(step == doctest::Approx(0.2101).epsilon(1e-3));
}

TEST_CASE("TDMA compensation: identity at v=0 and exact round trip") {
  const ConfigBundle cb = ConfigBundle::deskDefault();
  const PolarGrid grid = cb.makeGrid();
  const AdcFrame f = sim::synthesizeAdc(bareScene({radialTarget(20.0, 3.0)}, 7), cb.waveform,
                                        cb.array, 1.0, 0);
  auto rd = rangeDopplerMap(f, cb.waveform, grid);
  const auto original = rd;

  SUBCASE("v = 0 is the identity") {
    compensateTdmaPhase(rd, cb.waveform, cb.array, 0.0);
    for (std::size_t i = 0; i < rd.size(); ++i) CHECK(rd[i] == original[i]);
  }

  SUBCASE("compensating v then -v restores the input to 1e-12") {
    compensateTdmaPhase(rd, cb.waveform, cb.array, 4.2);
    compensateTdmaPhase(rd, cb.waveform, cb.array, -4.2);
    double max_rel = 0.0;
    for (std::size_t i = 0; i < rd.size(); ++i) {
      const double denom = std::max(1e-30, std::abs(original[i]));
      max_rel = std::max(max_rel, std::abs(rd[i] - original[i]) / denom);
    }
    CHECK(max_rel <= 1e-12);
  }
}

TEST_CASE("velocity unfolding on the desk geometry") {
  const ConfigBundle cb = ConfigBundle::deskDefault();
  const PolarGrid grid = cb.makeGrid();
  const DerivedQuantities der = derivedQuantities(cb.waveform);

  SUBCASE("static target: fold 0, v near 0") {
    const AdcFrame f = sim::synthesizeAdc(bareScene({radialTarget(20.0, 0.0)}), cb.waveform,
                                          cb.array, 0.5, 0);
    const auto rd = rangeDopplerMap(f, cb.waveform, grid);
    const Cell c = strongestCell(rd);
    const UnfoldResult u =
        estimateUnfoldedVelocity(rd, cb.waveform, cb.array, grid, c.r, c.d, cb.pipeline);
    CHECK(u.status == UnfoldStatus::Ok);
    CHECK(u.fold_index == 0);
    CHECK(std::abs(u.v_unfolded) < 0.1);
  }

  SUBCASE("aliased target recovered within 0.1 m/s") {
    const double v = 8.0;  // beyond the desk v_max of 5.97 m/s
    REQUIRE(v > der.v_max_mps);
    const AdcFrame f = sim::synthesizeAdc(bareScene({radialTarget(20.0, v)}), cb.waveform,
                                          cb.array, 0.5, 0);
    const auto rd = rangeDopplerMap(f, cb.waveform, grid);
    const Cell c = strongestCell(rd);
    const UnfoldResult u =
        estimateUnfoldedVelocity(rd, cb.waveform, cb.array, grid, c.r, c.d, cb.pipeline);
    CHECK(u.status == UnfoldStatus::Ok);
    CHECK(u.fold_index == 1);
    CHECK(std::abs(u.v_unfolded - v) < 0.1);
  }

  SUBCASE("geometry without overlaps is unsupported") {
    const ArrayGeometry plain =
        ArrayGeometry::fromElements({{0, 0}, {8, 0}, {16, 0}, {2, 1}, {4, 2}},
                                    {{0, 0}, {1, 0}, {2, 0}, {3, 0}, {4, 0}, {5, 0}, {6, 0}, {7, 0}});
    REQUIRE(plain.overlapped_pairs.empty());
    const AdcFrame f =
        sim::synthesizeAdc(bareScene({radialTarget(20.0, 1.0)}), cb.waveform, plain, 0.0, 0);
    const auto rd = rangeDopplerMap(f, cb.waveform, grid);
    const Cell c = strongestCell(rd);
    CHECK_THROWS_AS(
        estimateUnfoldedVelocity(rd, cb.waveform, plain, grid, c.r, c.d, cb.pipeline), Error);
  }

  SUBCASE("incoherent cell (multiple targets mixed) falls back to fold 0") {
    // Several targets in one range-Doppler cell scramble the overlapped-pair
    // phases; modeled directly by random channel phasors on the reference
    // geometry, whose many pairs make the coherence collapse robust.
    const ArrayGeometry geom = ArrayGeometry::radelft();
    const WaveformConfig cfg =
        WaveformConfig::make(76e9, 35e12, 28e-6, 5e-6, 64, 32, 12e6, 12, 16);
    const PolarGrid g = PolarGrid::make(cfg, 2, 128, 69, 48, 70.0, 20.0);
    Tensor<Cplx> rd({1, g.numDoppler(), static_cast<std::size_t>(geom.numVirtual())});
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> uni(-M_PI, M_PI);
    for (auto& v : rd) v = std::polar(1.0, uni(rng));
    const UnfoldResult u =
        estimateUnfoldedVelocity(rd, cfg, geom, g, 0, g.numDoppler() / 2, cb.pipeline);
    CHECK(u.status == UnfoldStatus::Ambiguous);
    CHECK(u.fold_index == 0);
    CHECK(u.v_unfolded == g.doppler_centers[g.numDoppler() / 2]);
  }
}

TEST_CASE("extended-limit velocity on the reference geometry") {
  // 17 m/s sits inside the 7 v_max = 17.35 m/s extended range.
  ConfigBundle cb = ConfigBundle::fullScale();
  cb.waveform = WaveformConfig::make(76e9, 35e12, 28e-6, 5e-6, 256, 64, 12e6, 12, 16);
  cb.grid.n_range = 256;  // covers 25.7 m, enough for a 20 m target
  const PolarGrid grid = cb.makeGrid();
  const DerivedQuantities der = derivedQuantities(cb.waveform);
  REQUIRE(17.0 < 7.0 * der.v_max_mps);

  const AdcFrame f = sim::synthesizeAdc(bareScene({radialTarget(20.0, 17.0)}), cb.waveform,
                                        cb.array, 0.5, 0);
  const auto rd = rangeDopplerMap(f, cb.waveform, grid);
  const Cell c = strongestCell(rd);
  const UnfoldResult u =
      estimateUnfoldedVelocity(rd, cb.waveform, cb.array, grid, c.r, c.d, cb.pipeline);
  CHECK(u.status == UnfoldStatus::Ok);
  CHECK(std::abs(u.v_unfolded - 17.0) < 0.1);
}

TEST_CASE("compensation moves the azimuth peak back to the true direction") {
  ConfigBundle cb = ConfigBundle::fullScale();
  cb.waveform = WaveformConfig::make(76e9, 35e12, 28e-6, 5e-6, 256, 32, 12e6, 12, 16);
  cb.grid.n_range = 256;
  const PolarGrid grid = cb.makeGrid();

  const double u_true = 0.3;
  const AdcFrame f = sim::synthesizeAdc(bareScene({radialTarget(20.0, 5.0, u_true)}, 4),
                                        cb.waveform, cb.array, 0.5, 0);
  auto rd = rangeDopplerMap(f, cb.waveform, grid);
  const Cell c = strongestCell(rd);
  const long long true_bin =
      std::llround((u_true - grid.az_sin_centers.front()) / grid.azSinStep());

  const auto spec_before = angleSpectrum(rd, cb.array, grid, c.r, c.d, false);
  const long long bias_before =
      std::llabs(static_cast<long long>(azPeak(spec_before)) - true_bin);

  const UnfoldResult u =
      estimateUnfoldedVelocity(rd, cb.waveform, cb.array, grid, c.r, c.d, cb.pipeline);
  REQUIRE(u.status == UnfoldStatus::Ok);
  CHECK(std::abs(u.v_unfolded - 5.0) < 0.1);
  compensateTdmaPhaseCell(rd, cb.waveform, cb.array, c.r, c.d, u.v_unfolded);
  const auto spec_after = angleSpectrum(rd, cb.array, grid, c.r, c.d, false);
  const long long bias_after =
      std::llabs(static_cast<long long>(azPeak(spec_after)) - true_bin);

  CHECK(bias_before >= 2);
  CHECK(bias_after <= 1);
}

TEST_CASE("DoA estimate on the desk configuration") {
  const ConfigBundle cb = ConfigBundle::deskDefault();
  const PolarGrid grid = cb.makeGrid();

  SUBCASE("boresight target: azimuth and elevation peaks at the zero-sine bins") {
    const AdcFrame f = sim::synthesizeAdc(bareScene({radialTarget(10.0, 0.0)}), cb.waveform,
                                          cb.array, 0.0, 0);
    const RadarCube cube = pipe::processFrame(f, cb.waveform, cb.array, grid, cb.pipeline);
    std::size_t br = 0, bd = 0, ba = 0;
    double bp = -1.0;
    for (std::size_t r = 0; r < cube.power.dim(0); ++r)
      for (std::size_t d = 0; d < cube.power.dim(1); ++d)
        for (std::size_t a = 0; a < cube.power.dim(2); ++a)
          if (cube.power(r, d, a) > bp) {
            bp = cube.power(r, d, a);
            br = r;
            bd = d;
            ba = a;
          }
    CHECK(br == 25);  // 10 m at 0.4015 m bins
    CHECK(bd == grid.numDoppler() / 2);
    CHECK(ba == grid.numAzimuth() / 2);
    CHECK(cube.elev_argmax(br, bd, ba) == static_cast<std::int32_t>(grid.numElevation() / 2));
  }

  SUBCASE("target at sin(theta) = 0.5 peaks at the nearest azimuth bin") {
    const AdcFrame f = sim::synthesizeAdc(bareScene({radialTarget(15.0, 0.0, 0.5)}), cb.waveform,
                                          cb.array, 0.0, 0);
    const auto rd = rangeDopplerMap(f, cb.waveform, grid);
    const Cell c = strongestCell(rd);
    const auto spec = angleSpectrum(rd, cb.array, grid, c.r, c.d, false);
    const long long nearest =
        std::llround((0.5 - grid.az_sin_centers.front()) / grid.azSinStep());
    CHECK(std::llabs(static_cast<long long>(azPeak(spec)) - nearest) <= 1);
  }

  SUBCASE("single-row single-Tx array reduces to 1D azimuth, elevation argmax 0") {
    const WaveformConfig cfg = WaveformConfig::make(76e9, 35e12, 28e-6, 5e-6, 64, 16, 12e6, 1, 8);
    const ArrayGeometry row = ArrayGeometry::fromElements(
        {{0, 0}}, {{0, 0}, {1, 0}, {2, 0}, {3, 0}, {4, 0}, {5, 0}, {6, 0}, {7, 0}});
    const PolarGrid g = PolarGrid::make(cfg, 2, 128, 32, 16, 70.0, 20.0);
    const AdcFrame f = sim::synthesizeAdc(bareScene({radialTarget(12.0, 0.0, 0.2)}), cfg, row,
                                          0.2, 0);
    const RadarCube cube = pipe::processFrame(f, cfg, row, g, cb.pipeline);
    for (const auto& e : cube.elev_argmax) CHECK(e == 0);
  }
}

TEST_CASE("processFrame end-to-end behavior") {
  const ConfigBundle cb = ConfigBundle::deskDefault();
  const PolarGrid grid = cb.makeGrid();

  SUBCASE("noise-only cubes have no persistent outlier cell") {
    Scene scene = bareScene({}, 21);
    bool any_persistent = false;
    std::vector<Tensor<double>> bev;
    for (int frame = 0; frame < 3; ++frame) {
      const AdcFrame f = sim::synthesizeAdc(scene, cb.waveform, cb.array, 1.0, frame);
      const RadarCube cube = pipe::processFrame(f, cb.waveform, cb.array, grid, cb.pipeline);
      Tensor<double> proj({cube.power.dim(0), cube.power.dim(2)});
      for (std::size_t r = 0; r < cube.power.dim(0); ++r)
        for (std::size_t d = 0; d < cube.power.dim(1); ++d)
          for (std::size_t a = 0; a < cube.power.dim(2); ++a)
            proj(r, a) = std::max(proj(r, a), cube.power(r, d, a));
      bev.push_back(std::move(proj));
    }
    for (std::size_t i = 0; i < bev[0].size(); ++i) {
      bool persistent = true;
      for (const auto& proj : bev) {
        double mean = 0.0, var = 0.0;
        for (const auto& v : proj) mean += v;
        mean /= proj.size();
        for (const auto& v : proj) var += (v - mean) * (v - mean);
        const double sigma = std::sqrt(var / proj.size());
        persistent = persistent && proj[i] > mean + 10.0 * sigma;
      }
      any_persistent = any_persistent || persistent;
    }
    CHECK(!any_persistent);
  }

  SUBCASE("one point target gives exactly one dominant (r, a) local maximum") {
    const AdcFrame f = sim::synthesizeAdc(bareScene({radialTarget(18.0, 1.5, -0.2)}, 2),
                                          cb.waveform, cb.array, 0.5, 0);
    const RadarCube cube = pipe::processFrame(f, cb.waveform, cb.array, grid, cb.pipeline);
    Tensor<double> proj({cube.power.dim(0), cube.power.dim(2)});
    double peak = 0.0;
    for (std::size_t r = 0; r < cube.power.dim(0); ++r)
      for (std::size_t d = 0; d < cube.power.dim(1); ++d)
        for (std::size_t a = 0; a < cube.power.dim(2); ++a) {
          proj(r, a) = std::max(proj(r, a), cube.power(r, d, a));
          peak = std::max(peak, proj(r, a));
        }
    int dominant = 0;
    const std::size_t R = proj.dim(0), A = proj.dim(1);
    for (std::size_t r = 1; r + 1 < R; ++r)
      for (std::size_t a = 1; a + 1 < A; ++a) {
        if (proj(r, a) < 0.5 * peak) continue;
        const bool is_max = proj(r, a) >= proj(r - 1, a) && proj(r, a) >= proj(r + 1, a) &&
                            proj(r, a) >= proj(r, a - 1) && proj(r, a) >= proj(r, a + 1);
        dominant += is_max;
      }
    CHECK(dominant == 1);
  }
}
